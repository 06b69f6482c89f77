// Shapes of the layout document served by the mltrace HTTP API
// (layout_version 1; see the service's schemas/layout.schema.json).

export const SUPPORTED_LAYOUT_VERSION = 1;

export type GlyphKind = "normal" | "victim" | "mule" | "meta";
export type ScenarioName = "none" | "combined" | "amount" | "time";

export interface BankRow {
  bank_id: string;
  display_name: string;
  row_index: number;
}

export interface ColumnSlot {
  node_key: string;
  column: number;
  first_txn_ms: number;
}

export interface GlyphSegment {
  account_id: string;
  incoming_arc_deg: number;
  outgoing_arc_deg: number;
  incoming: number;
  outgoing: number;
  thin: boolean;
}

export interface Glyph {
  node_key: string;
  bank_id: string;
  row_index: number;
  column: number;
  kind: GlyphKind;
  incoming_arc_deg: number;
  outgoing_arc_deg: number;
  incoming_total: number;
  outgoing_total: number;
  count?: number;
  segments?: GlyphSegment[];
}

export interface Edge {
  source: string;
  target: string;
  total_amount: number;
  txn_count: number;
  txn_ids: string[];
  fraud: boolean;
  thickness: number;
}

export interface BankSummary {
  bank_id: string;
  incoming_txn_count: number;
  outgoing_txn_count: number;
  incoming_total: number;
  outgoing_total: number;
  incoming_fraction: number;
  outgoing_fraction: number;
}

export interface TimelineBin {
  start_ms: number;
  txn_count: number;
  fraud_txn_count: number;
}

export interface Timeline {
  bin_width_ms: number;
  bins: TimelineBin[];
  play_order: string[];
}

export interface MetaNodeDoc {
  meta_id: string;
  bank_id: string;
  members: string[];
  member_sums: { account_id: string; incoming: number; outgoing: number }[];
  incoming_total: number;
  outgoing_total: number;
  count: number;
}

export interface Grouping {
  scenario: ScenarioName;
  singles: string[];
  metas: MetaNodeDoc[];
}

export interface Reduction {
  nodes_before: number;
  nodes_after: number;
  reduction_pct: number;
}

export interface LayoutDoc {
  layout_version: number;
  case_id: string;
  currency: string;
  maxima: {
    max_txn_amount: number;
    max_account_volume: number;
    case_span_ms: number;
  };
  rows: BankRow[];
  columns: ColumnSlot[];
  glyphs: Glyph[];
  edges: Edge[];
  summaries: BankSummary[];
  timeline: Timeline;
  grouping: Grouping;
  reduction: Reduction;
}

export interface AccountDetail {
  account_id: string;
  bank_id: string;
  role: "normal" | "victim" | "mule";
  incoming_total: number;
  outgoing_total: number;
  first_txn_ms: number;
  transactions: {
    txn_id: string;
    direction: "in" | "out";
    counterparty: string;
    amount_minor: number;
    timestamp: string;
    fraud_flag: boolean;
  }[];
}

export interface CaseSummary {
  case_id: string;
  alert_account: string;
  currency: string;
  bank_count: number;
  account_count: number;
  txn_count: number;
}
