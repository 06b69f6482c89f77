// Pure scene construction: layout document + view state -> drawable scene.
// Geometry follows the same visual grammar as the server's static SVG
// renderer (rows, ordinal columns, donut arcs, curved pointed edges), so a
// scene with nothing expanded matches the server rendering.

import { txnTimes, visibleTxnIds, type ViewState } from "./state.js";
import {
  SUPPORTED_LAYOUT_VERSION,
  type Glyph,
  type GlyphKind,
  type LayoutDoc,
} from "./types.js";

export class VersionMismatch extends Error {
  constructor(readonly found: number) {
    super(`layout_version ${found} is not supported (expected ${SUPPORTED_LAYOUT_VERSION})`);
  }
}

export interface SceneMetrics {
  width: number;
  rowHeight: number;
  panelWidth: number;
  nodeRadius: number;
  metaRadius: number;
  headerHeight: number;
  timelineHeight: number;
}

export const DEFAULT_METRICS: SceneMetrics = {
  width: 1280,
  rowHeight: 96,
  panelWidth: 230,
  nodeRadius: 13,
  metaRadius: 17,
  headerHeight: 46,
  timelineHeight: 74,
};

export interface ArcSpec {
  // degrees from 12 o'clock; incoming arcs run clockwise, outgoing counter-
  // clockwise, each within its half-circle budget
  startDeg: number;
  deltaDeg: number;
  clockwise: boolean;
  direction: "incoming" | "outgoing";
  accountId?: string;
  thin?: boolean;
}

export interface SceneNode {
  key: string;
  kind: GlyphKind;
  bankId: string;
  column: number;
  x: number;
  y: number;
  radius: number;
  arcs: ArcSpec[];
  count?: number;
  incomingTotal: number;
  outgoingTotal: number;
  tooltip: string;
  dimmed: boolean;
}

export interface SceneEdge {
  key: string;
  source: string;
  target: string;
  path: string;
  thickness: number;
  fraud: boolean;
  txnIds: string[];
  txnCount: number;
  totalAmount: number;
  dimmed: boolean;
}

export interface SceneRow {
  bankId: string;
  displayName: string;
  y: number;
  baselineY: number;
  incomingLabel: string;
  outgoingLabel: string;
  incomingFraction: number;
  outgoingFraction: number;
}

export interface SceneTimelineBar {
  x: number;
  width: number;
  height: number;
  fraudHeight: number;
  startMs: number;
}

export interface Scene {
  caseId: string;
  width: number;
  height: number;
  rows: SceneRow[];
  nodes: SceneNode[];
  edges: SceneEdge[];
  timeline: SceneTimelineBar[];
  timelineBaseY: number;
  playOrder: string[];
  reductionLabel: string;
}

function money(amountMinor: number, currency: string): string {
  const major = Math.trunc(amountMinor / 100);
  const cents = Math.abs(amountMinor % 100).toString().padStart(2, "0");
  return `${major.toLocaleString("en-US")}.${cents} ${currency}`;
}

function glyphTooltip(glyph: Glyph, currency: string): string {
  if (glyph.kind === "meta") {
    const members = (glyph.segments ?? []).map((segment) => {
      const marker = segment.thin ? " (thin segment)" : "";
      return `${segment.account_id}: in ${money(segment.incoming, currency)} / out ${money(segment.outgoing, currency)}${marker}`;
    });
    return [
      `group of ${glyph.count} accounts`,
      `in ${money(glyph.incoming_total, currency)} / out ${money(glyph.outgoing_total, currency)}`,
      ...members,
    ].join("\n");
  }
  return [
    `${glyph.node_key} (${glyph.kind})`,
    `in ${money(glyph.incoming_total, currency)} / out ${money(glyph.outgoing_total, currency)}`,
  ].join("\n");
}

function curveOffset(colA: number, colB: number, rowDist: number): number {
  const span = Math.abs(colB - colA);
  if (rowDist === 0) return 16 + 8 * span;
  return 8 + 3 * span + 5 * Math.abs(rowDist);
}

function edgePath(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  colA: number,
  colB: number,
  rowDist: number,
  trim: number,
): string {
  const dx = x2 - x1;
  const dy = y2 - y1;
  const length = Math.hypot(dx, dy) || 1;
  const ux = dx / length;
  const uy = dy / length;
  const sx = x1 + ux * trim;
  const sy = y1 + uy * trim;
  const tx = x2 - ux * (trim + 4);
  const ty = y2 - uy * (trim + 4);
  const offset = curveOffset(colA, colB, rowDist);
  let px = 0;
  let py = 1;
  if (rowDist !== 0) {
    px = -uy;
    py = ux;
    if (colB < colA) {
      px = -px;
      py = -py;
    }
  }
  const c1x = sx + (tx - sx) / 3 + px * offset;
  const c1y = sy + (ty - sy) / 3 + py * offset;
  const c2x = sx + (2 * (tx - sx)) / 3 + px * offset;
  const c2y = sy + (2 * (ty - sy)) / 3 + py * offset;
  const n = (v: number) => v.toFixed(2);
  return `M ${n(sx)} ${n(sy)} C ${n(c1x)} ${n(c1y)}, ${n(c2x)} ${n(c2y)}, ${n(tx)} ${n(ty)}`;
}

function glyphArcs(glyph: Glyph): ArcSpec[] {
  const arcs: ArcSpec[] = [];
  if (glyph.kind === "meta" && glyph.segments) {
    let inOffset = 0;
    let outOffset = 0;
    for (const segment of glyph.segments) {
      if (segment.incoming_arc_deg > 0) {
        arcs.push({
          startDeg: inOffset,
          deltaDeg: segment.incoming_arc_deg,
          clockwise: true,
          direction: "incoming",
          accountId: segment.account_id,
          thin: segment.thin,
        });
      }
      inOffset += segment.incoming_arc_deg;
      if (segment.outgoing_arc_deg > 0) {
        arcs.push({
          startDeg: outOffset,
          deltaDeg: segment.outgoing_arc_deg,
          clockwise: false,
          direction: "outgoing",
          accountId: segment.account_id,
          thin: segment.thin,
        });
      }
      outOffset -= segment.outgoing_arc_deg;
    }
    return arcs;
  }
  if (glyph.incoming_arc_deg > 0) {
    arcs.push({ startDeg: 0, deltaDeg: glyph.incoming_arc_deg, clockwise: true, direction: "incoming" });
  }
  if (glyph.outgoing_arc_deg > 0) {
    arcs.push({ startDeg: 0, deltaDeg: glyph.outgoing_arc_deg, clockwise: false, direction: "outgoing" });
  }
  return arcs;
}

/** Build the drawable scene for one layout and view state. */
export function buildScene(
  layout: LayoutDoc,
  view: ViewState,
  metrics: SceneMetrics = DEFAULT_METRICS,
): Scene {
  if (layout.layout_version !== SUPPORTED_LAYOUT_VERSION) {
    throw new VersionMismatch(layout.layout_version);
  }
  const { width, rowHeight, panelWidth, headerHeight } = metrics;
  const plotX0 = panelWidth;
  const plotX1 = width - 28;
  const columnCount = Math.max(1, layout.columns.length);
  const colWidth = (plotX1 - plotX0) / columnCount;
  const rowIndex = new Map(layout.rows.map((row) => [row.bank_id, row.row_index]));

  const visible = new Set(visibleTxnIds(layout, view));
  const filtering = view.timeFilter !== null;

  const nodes: SceneNode[] = layout.glyphs.map((glyph) => {
    const x = plotX0 + (glyph.column + 0.5) * colWidth;
    const y = headerHeight + (rowIndex.get(glyph.bank_id) ?? 0) * rowHeight + rowHeight / 2;
    return {
      key: glyph.node_key,
      kind: glyph.kind,
      bankId: glyph.bank_id,
      column: glyph.column,
      x,
      y,
      radius: glyph.kind === "meta" ? metrics.metaRadius : metrics.nodeRadius,
      arcs: glyphArcs(glyph),
      count: glyph.count,
      incomingTotal: glyph.incoming_total,
      outgoingTotal: glyph.outgoing_total,
      tooltip: glyphTooltip(glyph, layout.currency),
      dimmed: false,
    };
  });
  const nodeByKey = new Map(nodes.map((node) => [node.key, node]));

  const edges: SceneEdge[] = layout.edges.map((edge) => {
    const source = nodeByKey.get(edge.source);
    const target = nodeByKey.get(edge.target);
    if (!source || !target) {
      throw new Error(`edge endpoint missing from glyphs: ${edge.source} -> ${edge.target}`);
    }
    const rowDist =
      (rowIndex.get(target.bankId) ?? 0) - (rowIndex.get(source.bankId) ?? 0);
    const hidden = filtering && !edge.txn_ids.some((id) => visible.has(id));
    return {
      key: `${edge.source}->${edge.target}`,
      source: edge.source,
      target: edge.target,
      path: edgePath(
        source.x, source.y, target.x, target.y,
        source.column, target.column, rowDist, source.radius + 5,
      ),
      thickness: edge.thickness,
      fraud: edge.fraud,
      txnIds: [...edge.txn_ids],
      txnCount: edge.txn_count,
      totalAmount: edge.total_amount,
      dimmed: hidden,
    };
  });

  // Time filtering only dims: nodes whose every bundle is dimmed fade out too
  if (filtering) {
    const active = new Set<string>();
    for (const edge of edges) {
      if (!edge.dimmed) {
        active.add(edge.source);
        active.add(edge.target);
      }
    }
    for (const node of nodes) node.dimmed = !active.has(node.key);
  }

  const summaryByBank = new Map(layout.summaries.map((s) => [s.bank_id, s]));
  const rows: SceneRow[] = layout.rows.map((row) => {
    const summary = summaryByBank.get(row.bank_id);
    const y = headerHeight + row.row_index * rowHeight + rowHeight / 2;
    return {
      bankId: row.bank_id,
      displayName: row.display_name,
      y,
      baselineY: headerHeight + (row.row_index + 1) * rowHeight,
      incomingLabel: summary
        ? `in ${summary.incoming_txn_count} txn / ${money(summary.incoming_total, layout.currency)}`
        : "",
      outgoingLabel: summary
        ? `out ${summary.outgoing_txn_count} txn / ${money(summary.outgoing_total, layout.currency)}`
        : "",
      incomingFraction: summary?.incoming_fraction ?? 0,
      outgoingFraction: summary?.outgoing_fraction ?? 0,
    };
  });

  const timelineBaseY = headerHeight + layout.rows.length * rowHeight + 18;
  const stripHeight = 38;
  const maxCount = Math.max(0, ...layout.timeline.bins.map((bin) => bin.txn_count));
  const slot = (plotX1 - plotX0) / Math.max(1, layout.timeline.bins.length);
  const timeline: SceneTimelineBar[] = layout.timeline.bins.map((bin, i) => ({
    x: plotX0 + i * slot + 1,
    width: Math.max(1, slot - 2),
    height: maxCount ? (stripHeight * bin.txn_count) / maxCount : 0,
    fraudHeight: maxCount ? (stripHeight * bin.fraud_txn_count) / maxCount : 0,
    startMs: bin.start_ms,
  }));

  return {
    caseId: layout.case_id,
    width,
    height: timelineBaseY + stripHeight + 60,
    rows,
    nodes,
    edges,
    timeline,
    timelineBaseY,
    playOrder: visibleTxnIds(layout, view),
    reductionLabel: `${layout.reduction.nodes_before} -> ${layout.reduction.nodes_after} nodes (${layout.reduction.reduction_pct}% reduction)`,
  };
}

export { txnTimes };
