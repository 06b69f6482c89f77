// Play-flow stepping: highlight transactions in chronological order,
// mapping each one onto the edge bundle that carries it.

import type { ViewState } from "./state.js";
import { visibleTxnIds } from "./state.js";
import type { LayoutDoc } from "./types.js";

export interface PlaybackStep {
  txnId: string;
  edgeKey: string;
  position: number;
  total: number;
}

/** The highlight sequence for the current view (time filter applied). */
export function playbackSequence(layout: LayoutDoc, view: ViewState): PlaybackStep[] {
  const edgeByTxn = new Map<string, string>();
  for (const edge of layout.edges) {
    for (const txnId of edge.txn_ids) {
      edgeByTxn.set(txnId, `${edge.source}->${edge.target}`);
    }
  }
  const order = visibleTxnIds(layout, view);
  return order.map((txnId, position) => ({
    txnId,
    edgeKey: edgeByTxn.get(txnId) ?? "",
    position,
    total: order.length,
  }));
}

export type TickHandler = (step: PlaybackStep | null) => void;

/**
 * Wall-clock driver for the play-flow button. Pure stepping is in
 * playbackSequence; this class only owns the interval timer.
 */
export class PlaybackDriver {
  private timer: ReturnType<typeof setInterval> | null = null;
  private position = 0;

  constructor(
    private readonly steps: PlaybackStep[],
    private readonly onTick: TickHandler,
    private readonly intervalMs = 600,
  ) {}

  get playing(): boolean {
    return this.timer !== null;
  }

  get currentPosition(): number {
    return this.position;
  }

  play(): void {
    if (this.timer !== null || this.steps.length === 0) return;
    this.timer = setInterval(() => this.advance(), this.intervalMs);
    this.emit();
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  reset(): void {
    this.pause();
    this.position = 0;
    this.onTick(null);
  }

  private advance(): void {
    if (this.position + 1 >= this.steps.length) {
      this.pause();
      return;
    }
    this.position += 1;
    this.emit();
  }

  private emit(): void {
    this.onTick(this.steps[this.position] ?? null);
  }
}
