// View state and its pure transitions. The UI never computes grouping
// itself: every partition comes from the server, and expansion/time
// filtering are view parameters layered on top of the fetched layout.

import type { LayoutDoc, ScenarioName } from "./types.js";

export interface GroupingParams {
  scenario: ScenarioName;
  thresholdPct?: number;
  windowHours?: number;
  minAccounts: number;
  excludeFraudTxns: boolean;
}

export type Playback =
  | { kind: "stopped" }
  | { kind: "playing"; position: number }
  | { kind: "paused"; position: number };

export interface ViewState {
  caseId: string;
  params: GroupingParams;
  expanded: ReadonlySet<string>;
  timeFilter: readonly [number, number] | null; // epoch ms, inclusive
  playback: Playback;
  hovered: string | null;
}

export const DEFAULT_PARAMS: GroupingParams = {
  scenario: "none",
  minAccounts: 15,
  excludeFraudTxns: false,
};

export function initialViewState(caseId: string, params: GroupingParams = DEFAULT_PARAMS): ViewState {
  return {
    caseId,
    params,
    expanded: new Set(),
    timeFilter: null,
    playback: { kind: "stopped" },
    hovered: null,
  };
}

/** Add a meta to the expanded set; returns the same state when already expanded. */
export function withExpanded(state: ViewState, metaId: string): ViewState {
  if (state.expanded.has(metaId)) return state;
  const expanded = new Set(state.expanded);
  expanded.add(metaId);
  return { ...state, expanded };
}

/** Collapse one expanded meta back into its group. */
export function withoutExpanded(state: ViewState, metaId: string): ViewState {
  if (!state.expanded.has(metaId)) return state;
  const expanded = new Set(state.expanded);
  expanded.delete(metaId);
  return { ...state, expanded };
}

/** New grouping parameters invalidate the expansion set (the meta ids change). */
export function withParams(state: ViewState, params: GroupingParams): ViewState {
  return { ...state, params, expanded: new Set(), playback: { kind: "stopped" } };
}

export function withTimeFilter(state: ViewState, filter: readonly [number, number] | null): ViewState {
  return { ...state, timeFilter: filter, playback: { kind: "stopped" } };
}

export function withHovered(state: ViewState, nodeKey: string | null): ViewState {
  return { ...state, hovered: nodeKey };
}

/** Expanded ids that exist in the current layout (stale ids are dropped). */
export function validExpanded(state: ViewState, layout: LayoutDoc): string[] {
  const known = new Set(layout.grouping.metas.map((meta) => meta.meta_id));
  return [...state.expanded].filter((id) => known.has(id)).sort();
}

/** Transaction ids inside the time filter, in the layout's play order. */
export function visibleTxnIds(layout: LayoutDoc, state: ViewState): string[] {
  if (!state.timeFilter) return [...layout.timeline.play_order];
  const [start, end] = state.timeFilter;
  const timeByTxn = txnTimes(layout);
  return layout.timeline.play_order.filter((txnId) => {
    const t = timeByTxn.get(txnId);
    return t !== undefined && t >= start && t <= end;
  });
}

// Approximate each transaction's instant by its bin start: play_order is
// (timestamp, txn_id)-sorted and bins tile the span in order, so walking
// play_order against cumulative bin counts recovers each txn's bin without
// another server call (filtering stays a pure view concern).
export function txnTimes(layout: LayoutDoc): Map<string, number> {
  const times = new Map<string, number>();
  const bins = layout.timeline.bins;
  let index = 0;
  for (const bin of bins) {
    for (let i = 0; i < bin.txn_count; i += 1) {
      const txnId = layout.timeline.play_order[index];
      if (txnId !== undefined) times.set(txnId, bin.start_ms);
      index += 1;
    }
  }
  return times;
}
