"""Tabular sequential layout: bank rows, first-transaction column order,
donut glyph geometry, aggregated edges, bank summaries and timeline bins.

All functions are pure over immutable inputs; the resulting
:class:`LayoutModel` is the contract shared by the SVG renderer, the HTTP
service and the investigator UI (serialised with ``layout_version`` 1,
see ``schemas/layout.schema.json``).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Any, Mapping

from .grouping import CapExceeded, GroupingResult, ReductionReport, reduction_report
from .model import (
    Bank,
    CaseNetwork,
    NetworkMaxima,
    Role,
    account_sums,
    compute_maxima,
    first_txn_times,
)

__all__ = [
    "LAYOUT_VERSION",
    "LayoutConfig",
    "LayoutError",
    "IntraGroupEdge",
    "GlyphKind",
    "ColumnSlot",
    "ColumnAssignment",
    "GlyphSegment",
    "NodeGlyph",
    "EdgeBundle",
    "BankRowSummary",
    "TimelineBin",
    "TimelineModel",
    "LayoutModel",
    "order_nodes",
    "glyph_angles",
    "aggregate_edges",
    "edge_thickness",
    "bank_summaries",
    "build_timeline",
    "build_layout",
    "layout_to_dict",
]

LAYOUT_VERSION = 1

# Meta sub-arcs thinner than this are flagged for tooltip-only display.
THIN_SEGMENT_DEG = 2.0


class LayoutError(ValueError):
    pass


class IntraGroupEdge(LayoutError):
    """A transaction mapped to identical endpoints: the grouping is invalid."""


class GlyphKind(str, Enum):
    NORMAL = "normal"
    VICTIM = "victim"
    MULE = "mule"
    META = "meta"


@dataclass(frozen=True, slots=True)
class LayoutConfig:
    bin_count: int = 48
    edge_min_px: float = 1.0
    edge_max_px: float = 6.0


@dataclass(frozen=True, slots=True)
class ColumnSlot:
    node_key: str
    column: int
    first_txn: datetime


@dataclass(frozen=True, slots=True)
class ColumnAssignment:
    """Global column per node, ordered by (first transaction, node key)."""

    slots: tuple[ColumnSlot, ...]

    def index(self) -> dict[str, int]:
        return {slot.node_key: slot.column for slot in self.slots}


@dataclass(frozen=True, slots=True)
class GlyphSegment:
    account_id: str
    incoming_arc_deg: float
    outgoing_arc_deg: float
    incoming: int
    outgoing: int
    thin: bool


@dataclass(frozen=True, slots=True)
class NodeGlyph:
    node_key: str
    bank_id: str
    column: int
    kind: GlyphKind
    incoming_arc_deg: float
    outgoing_arc_deg: float
    incoming_total: int
    outgoing_total: int
    count: int | None = None
    segments: tuple[GlyphSegment, ...] = ()


@dataclass(frozen=True, slots=True)
class EdgeBundle:
    """All transactions flowing the same direction between two nodes."""

    source: str
    target: str
    total_amount: int
    txn_count: int
    txn_ids: tuple[str, ...]
    fraud: bool
    thickness: float


@dataclass(frozen=True, slots=True)
class BankRowSummary:
    bank_id: str
    incoming_txn_count: int
    outgoing_txn_count: int
    incoming_total: int
    outgoing_total: int
    incoming_fraction: float
    outgoing_fraction: float


@dataclass(frozen=True, slots=True)
class TimelineBin:
    start: datetime
    txn_count: int
    fraud_txn_count: int


@dataclass(frozen=True, slots=True)
class TimelineModel:
    bin_width: timedelta
    bins: tuple[TimelineBin, ...]
    play_order: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class LayoutModel:
    case_id: str
    currency: str
    rows: tuple[Bank, ...]
    columns: ColumnAssignment
    glyphs: tuple[NodeGlyph, ...]
    edges: tuple[EdgeBundle, ...]
    summaries: tuple[BankRowSummary, ...]
    timeline: TimelineModel
    maxima: NetworkMaxima
    grouping: GroupingResult
    reduction: ReductionReport


def _round_deg(value: Decimal) -> float:
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def glyph_angles(in_sum: int, out_sum: int, max_account_volume: int) -> tuple[float, float]:
    """Arc lengths in degrees: the network's largest per-account volume maps
    to a half circle (180 degrees); results rounded to 0.1 degrees."""
    if max_account_volume <= 0:
        raise LayoutError("max_account_volume must be positive")
    angles = []
    for total in (in_sum, out_sum):
        if total > max_account_volume:
            raise CapExceeded(
                f"directional sum {total} exceeds max account volume {max_account_volume}"
            )
        angles.append(_round_deg(Decimal(180 * total) / Decimal(max_account_volume)))
    return angles[0], angles[1]


def order_nodes(case: CaseNetwork, grouping: GroupingResult) -> ColumnAssignment:
    """Assign one global column to every surviving node.

    A meta-node sorts at its earliest member's first transaction; ties break
    on the node key so layouts are stable across runs. Columns re-compact to
    0..n-1 after grouping so the surviving nodes stay equidistant.
    """
    first = first_txn_times(case)
    keyed: list[tuple[datetime, str]] = [(first[a], a) for a in grouping.singles]
    keyed.extend(
        (min(first[m] for m in meta.members), meta.meta_id) for meta in grouping.metas
    )
    keyed.sort()
    return ColumnAssignment(
        slots=tuple(
            ColumnSlot(node_key=key, column=i, first_txn=ts) for i, (ts, key) in enumerate(keyed)
        )
    )


def aggregate_edges(case: CaseNetwork, node_map: Mapping[str, str]) -> list[EdgeBundle]:
    """Merge transactions into one bundle per ordered (source node, target
    node) pair. Thickness is left at 0 here; :func:`build_layout` scales it.
    """
    buckets: dict[tuple[str, str], list] = {}
    for txn in case.transactions:
        source = node_map[txn.source]
        target = node_map[txn.target]
        if source == target:
            raise IntraGroupEdge(
                f"transaction {txn.txn_id!r} maps to identical endpoints {source!r}"
            )
        buckets.setdefault((source, target), []).append(txn)

    bundles = []
    for (source, target), txns in buckets.items():
        txns.sort(key=lambda t: (t.timestamp, t.txn_id))
        bundles.append(
            EdgeBundle(
                source=source,
                target=target,
                total_amount=sum(t.amount for t in txns),
                txn_count=len(txns),
                txn_ids=tuple(t.txn_id for t in txns),
                fraud=any(t.fraud_flag for t in txns),
                thickness=0.0,
            )
        )
    bundles.sort(key=lambda b: (b.source, b.target))
    return bundles


def edge_thickness(
    total_amount: int, max_txn_amount: int, min_px: float, max_px: float
) -> float:
    """Linear thickness ramp, saturating at the largest single transaction."""
    if max_txn_amount <= 0:
        raise LayoutError("max_txn_amount must be positive")
    if not min_px < max_px:
        raise LayoutError("min_px must be below max_px")
    return min_px + (max_px - min_px) * min(1.0, total_amount / max_txn_amount)


def bank_summaries(case: CaseNetwork) -> list[BankRowSummary]:
    """Per-bank transaction counts and totals for the row detail panels.

    A transaction counts as outgoing for the source's bank and incoming for
    the target's bank; an intra-bank transaction therefore counts once in
    each direction of the same bank. Bar fractions normalise by the largest
    directional total across all banks.
    """
    bank_of = {account.account_id: account.bank_id for account in case.accounts}
    stats = {bank.bank_id: [0, 0, 0, 0] for bank in case.banks}  # in_n, out_n, in_amt, out_amt
    for txn in case.transactions:
        target_bank = stats[bank_of[txn.target]]
        target_bank[0] += 1
        target_bank[2] += txn.amount
        source_bank = stats[bank_of[txn.source]]
        source_bank[1] += 1
        source_bank[3] += txn.amount

    top = max(max(s[2], s[3]) for s in stats.values())
    summaries = []
    for bank in case.banks:
        in_n, out_n, in_amt, out_amt = stats[bank.bank_id]
        summaries.append(
            BankRowSummary(
                bank_id=bank.bank_id,
                incoming_txn_count=in_n,
                outgoing_txn_count=out_n,
                incoming_total=in_amt,
                outgoing_total=out_amt,
                incoming_fraction=in_amt / top if top else 0.0,
                outgoing_fraction=out_amt / top if top else 0.0,
            )
        )
    return summaries


def _epoch_ms(ts: datetime) -> int:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return int(ts.timestamp() * 1000)


def build_timeline(case: CaseNetwork, bin_count: int = 48) -> TimelineModel:
    """Equal-width bins over [earliest, latest], plus the play-flow order.

    Bins are closed on the right (the first also on the left): a transaction
    exactly on a boundary falls in the earlier bin, and the latest instant
    lands in the last bin. A zero-span case collapses to one degenerate bin.
    """
    if bin_count < 1:
        raise LayoutError("bin_count must be at least 1")
    stamps = [txn.timestamp for txn in case.transactions]
    start, end = min(stamps), max(stamps)
    span_ms = _epoch_ms(end) - _epoch_ms(start)
    play_order = tuple(
        txn.txn_id for txn in sorted(case.transactions, key=lambda t: (t.timestamp, t.txn_id))
    )

    if span_ms == 0:
        bins = [TimelineBin(start, len(case.transactions), sum(t.fraud_flag for t in case.transactions))]
        return TimelineModel(bin_width=timedelta(0), bins=tuple(bins), play_order=play_order)

    counts = [0] * bin_count
    fraud_counts = [0] * bin_count
    start_ms = _epoch_ms(start)
    for txn in case.transactions:
        delta = _epoch_ms(txn.timestamp) - start_ms
        index = 0 if delta == 0 else (delta * bin_count + span_ms - 1) // span_ms - 1
        counts[index] += 1
        if txn.fraud_flag:
            fraud_counts[index] += 1

    bins = [
        TimelineBin(
            start=datetime.fromtimestamp((start_ms + i * span_ms // bin_count) / 1000.0, tz=timezone.utc),
            txn_count=counts[i],
            fraud_txn_count=fraud_counts[i],
        )
        for i in range(bin_count)
    ]
    return TimelineModel(
        bin_width=timedelta(milliseconds=span_ms / bin_count),
        bins=tuple(bins),
        play_order=play_order,
    )


def _bank_rows(case: CaseNetwork) -> tuple[Bank, ...]:
    # Rows ordered the way banks entered the scheme, like columns; ties on id.
    first = first_txn_times(case)
    bank_first: dict[str, datetime] = {}
    for account in case.accounts:
        ts = first[account.account_id]
        known = bank_first.get(account.bank_id)
        if known is None or ts < known:
            bank_first[account.bank_id] = ts
    return tuple(sorted(case.banks, key=lambda b: (bank_first[b.bank_id], b.bank_id)))


def build_layout(
    case: CaseNetwork, grouping: GroupingResult, config: LayoutConfig | None = None
) -> LayoutModel:
    """Compose the full layout model for one case and grouping."""
    if config is None:
        config = LayoutConfig()
    maxima = compute_maxima(case)
    columns = order_nodes(case, grouping)
    column_of = columns.index()
    sums = account_sums(case)
    roles = {account.account_id: account.role for account in case.accounts}
    bank_of = {account.account_id: account.bank_id for account in case.accounts}

    kind_of_role = {
        Role.NORMAL: GlyphKind.NORMAL,
        Role.VICTIM: GlyphKind.VICTIM,
        Role.MULE: GlyphKind.MULE,
    }
    glyphs: list[NodeGlyph] = []
    for account_id in grouping.singles:
        incoming, outgoing = sums[account_id]
        in_deg, out_deg = glyph_angles(incoming, outgoing, maxima.max_account_volume)
        glyphs.append(
            NodeGlyph(
                node_key=account_id,
                bank_id=bank_of[account_id],
                column=column_of[account_id],
                kind=kind_of_role[roles[account_id]],
                incoming_arc_deg=in_deg,
                outgoing_arc_deg=out_deg,
                incoming_total=incoming,
                outgoing_total=outgoing,
            )
        )
    for meta in grouping.metas:
        in_deg, out_deg = glyph_angles(
            meta.incoming_total, meta.outgoing_total, maxima.max_account_volume
        )
        segments = []
        for member in meta.member_sums:
            seg_in, seg_out = glyph_angles(
                member.incoming, member.outgoing, maxima.max_account_volume
            )
            thin = (0 < seg_in < THIN_SEGMENT_DEG) or (0 < seg_out < THIN_SEGMENT_DEG)
            segments.append(
                GlyphSegment(
                    account_id=member.account_id,
                    incoming_arc_deg=seg_in,
                    outgoing_arc_deg=seg_out,
                    incoming=member.incoming,
                    outgoing=member.outgoing,
                    thin=thin,
                )
            )
        glyphs.append(
            NodeGlyph(
                node_key=meta.meta_id,
                bank_id=meta.bank_id,
                column=column_of[meta.meta_id],
                kind=GlyphKind.META,
                incoming_arc_deg=in_deg,
                outgoing_arc_deg=out_deg,
                incoming_total=meta.incoming_total,
                outgoing_total=meta.outgoing_total,
                count=meta.count,
                segments=tuple(segments),
            )
        )
    glyphs.sort(key=lambda g: g.column)

    bundles = aggregate_edges(case, grouping.node_map)
    edges = tuple(
        EdgeBundle(
            source=b.source,
            target=b.target,
            total_amount=b.total_amount,
            txn_count=b.txn_count,
            txn_ids=b.txn_ids,
            fraud=b.fraud,
            thickness=edge_thickness(
                b.total_amount, maxima.max_txn_amount, config.edge_min_px, config.edge_max_px
            ),
        )
        for b in sorted(bundles, key=lambda b: (column_of[b.source], column_of[b.target]))
    )

    return LayoutModel(
        case_id=case.case_id,
        currency=case.currency,
        rows=_bank_rows(case),
        columns=columns,
        glyphs=tuple(glyphs),
        edges=edges,
        summaries=tuple(bank_summaries(case)),
        timeline=build_timeline(case, config.bin_count),
        maxima=maxima,
        grouping=grouping,
        reduction=reduction_report(len(case.accounts), grouping.node_count),
    )


def layout_to_dict(layout: LayoutModel) -> dict[str, Any]:
    """Serialise to the versioned JSON document consumed by the renderer
    and the investigator UI."""
    row_index = {bank.bank_id: i for i, bank in enumerate(layout.rows)}
    return {
        "layout_version": LAYOUT_VERSION,
        "case_id": layout.case_id,
        "currency": layout.currency,
        "maxima": {
            "max_txn_amount": layout.maxima.max_txn_amount,
            "max_account_volume": layout.maxima.max_account_volume,
            "case_span_ms": int(layout.maxima.case_span.total_seconds() * 1000),
        },
        "rows": [
            {"bank_id": bank.bank_id, "display_name": bank.display_name, "row_index": i}
            for i, bank in enumerate(layout.rows)
        ],
        "columns": [
            {
                "node_key": slot.node_key,
                "column": slot.column,
                "first_txn_ms": _epoch_ms(slot.first_txn),
            }
            for slot in layout.columns.slots
        ],
        "glyphs": [
            {
                "node_key": g.node_key,
                "bank_id": g.bank_id,
                "row_index": row_index[g.bank_id],
                "column": g.column,
                "kind": g.kind.value,
                "incoming_arc_deg": g.incoming_arc_deg,
                "outgoing_arc_deg": g.outgoing_arc_deg,
                "incoming_total": g.incoming_total,
                "outgoing_total": g.outgoing_total,
                **({"count": g.count} if g.kind is GlyphKind.META else {}),
                **(
                    {
                        "segments": [
                            {
                                "account_id": s.account_id,
                                "incoming_arc_deg": s.incoming_arc_deg,
                                "outgoing_arc_deg": s.outgoing_arc_deg,
                                "incoming": s.incoming,
                                "outgoing": s.outgoing,
                                "thin": s.thin,
                            }
                            for s in g.segments
                        ]
                    }
                    if g.kind is GlyphKind.META
                    else {}
                ),
            }
            for g in layout.glyphs
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "total_amount": e.total_amount,
                "txn_count": e.txn_count,
                "txn_ids": list(e.txn_ids),
                "fraud": e.fraud,
                "thickness": round(e.thickness, 3),
            }
            for e in layout.edges
        ],
        "summaries": [
            {
                "bank_id": s.bank_id,
                "incoming_txn_count": s.incoming_txn_count,
                "outgoing_txn_count": s.outgoing_txn_count,
                "incoming_total": s.incoming_total,
                "outgoing_total": s.outgoing_total,
                "incoming_fraction": round(s.incoming_fraction, 6),
                "outgoing_fraction": round(s.outgoing_fraction, 6),
            }
            for s in layout.summaries
        ],
        "timeline": {
            "bin_width_ms": layout.timeline.bin_width.total_seconds() * 1000,
            "bins": [
                {
                    "start_ms": _epoch_ms(b.start),
                    "txn_count": b.txn_count,
                    "fraud_txn_count": b.fraud_txn_count,
                }
                for b in layout.timeline.bins
            ],
            "play_order": list(layout.timeline.play_order),
        },
        "grouping": {
            "scenario": layout.grouping.scenario.value,
            "singles": list(layout.grouping.singles),
            "metas": [
                {
                    "meta_id": meta.meta_id,
                    "bank_id": meta.bank_id,
                    "members": list(meta.members),
                    "member_sums": [
                        {"account_id": s.account_id, "incoming": s.incoming, "outgoing": s.outgoing}
                        for s in meta.member_sums
                    ],
                    "incoming_total": meta.incoming_total,
                    "outgoing_total": meta.outgoing_total,
                    "count": meta.count,
                }
                for meta in layout.grouping.metas
            ],
        },
        "reduction": {
            "nodes_before": layout.reduction.nodes_before,
            "nodes_after": layout.reduction.nodes_after,
            "reduction_pct": layout.reduction.reduction_pct,
        },
    }
