"""Deterministic static SVG rendering of a layout model.

Output is byte-stable: element order is fixed (rows, edges, glyphs,
timeline, legend), every coordinate is formatted with two decimals, and
nothing depends on dict iteration order or platform float printing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from datetime import timezone
from pathlib import Path
from typing import Any

from .layout import GlyphKind, LayoutModel, NodeGlyph

__all__ = ["Theme", "EmptyLayout", "load_theme", "render_svg", "render_glyph"]


class EmptyLayout(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Theme:
    """Colors and metrics of the rendering; all colors are hex strings."""

    incoming: str = "#7d5ba6"
    outgoing: str = "#1f9e92"
    victim: str = "#e8b931"
    mule: str = "#d23f44"
    fraud_gradient_start: str = "#ff9d8a"
    fraud_gradient_end: str = "#b0161b"
    neutral: str = "#c9ced8"
    ring_base: str = "#e8eaf0"
    text: str = "#2e3440"
    background: str = "#ffffff"
    node_radius: float = 13.0
    meta_radius: float = 17.0
    ring_width: float = 5.0
    row_height: float = 96.0
    edge_min_px: float = 1.0
    edge_max_px: float = 6.0
    font_size: float = 11.0
    small_font_size: float = 9.0
    canvas_width: float = 1280.0
    panel_width: float = 230.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, str) and not _is_hex(value):
                raise ValueError(f"theme color {f.name} must be a hex value, got {value!r}")
        if self.node_radius <= 0 or self.meta_radius <= 0 or self.row_height <= 0:
            raise ValueError("theme radii and row height must be positive")


def _is_hex(value: str) -> bool:
    if not value.startswith("#") or len(value) not in (4, 7):
        return False
    try:
        int(value[1:], 16)
    except ValueError:
        return False
    return True


def load_theme(source: str | Path | dict[str, Any] | None) -> Theme:
    """Theme from a JSON file (or dict) of overrides onto the defaults."""
    if source is None:
        return Theme()
    overrides = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    known = {f.name for f in fields(Theme)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown theme keys: {sorted(unknown)}")
    return replace(Theme(), **overrides)


def _n(value: float) -> str:
    # Fixed two-decimal formatting keeps output byte-identical across platforms.
    return f"{value:.2f}"


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _money(amount_minor: int, currency: str) -> str:
    return f"{amount_minor // 100:,}.{amount_minor % 100:02d} {currency}"


def _polar(cx: float, cy: float, r: float, deg_from_top: float) -> tuple[float, float]:
    # Degrees measured clockwise from 12 o'clock, SVG y-axis pointing down.
    rad = math.radians(deg_from_top - 90.0)
    return cx + r * math.cos(rad), cy + r * math.sin(rad)


def _arc_path(cx: float, cy: float, r: float, start_deg: float, delta_deg: float, clockwise: bool) -> str:
    end_deg = start_deg + delta_deg if clockwise else start_deg - delta_deg
    x0, y0 = _polar(cx, cy, r, start_deg)
    x1, y1 = _polar(cx, cy, r, end_deg)
    sweep = 1 if clockwise else 0
    return f"M {_n(x0)} {_n(y0)} A {_n(r)} {_n(r)} 0 0 {sweep} {_n(x1)} {_n(y1)}"


def render_glyph(glyph: NodeGlyph, theme: Theme, cx: float = 0.0, cy: float = 0.0) -> str:
    """One donut or meta-node glyph as an SVG fragment.

    The incoming arc grows clockwise from 12 o'clock over the right half of
    the ring, the outgoing arc counter-clockwise over the left half; each
    half-circle is the full 180-degree budget. Meta glyphs subdivide the
    arcs per member with thin separators (omitted below 2 degrees) and show
    the member count in the middle.
    """
    is_meta = glyph.kind is GlyphKind.META
    r = theme.meta_radius if is_meta else theme.node_radius
    parts = [f'<g class="glyph glyph-{glyph.kind.value}" data-node="{_esc(glyph.node_key)}">']
    parts.append(
        f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r)}" fill="none" '
        f'stroke="{theme.ring_base}" stroke-width="{_n(theme.ring_width)}"/>'
    )
    if glyph.kind in (GlyphKind.VICTIM, GlyphKind.MULE):
        halo = theme.victim if glyph.kind is GlyphKind.VICTIM else theme.mule
        parts.append(
            f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r + theme.ring_width)}" fill="none" '
            f'stroke="{halo}" stroke-width="2.00"/>'
        )

    def arc(start: float, delta: float, clockwise: bool, color: str) -> None:
        if delta > 0:
            parts.append(
                f'<path d="{_arc_path(cx, cy, r, start, delta, clockwise)}" fill="none" '
                f'stroke="{color}" stroke-width="{_n(theme.ring_width)}"/>'
            )

    if is_meta and glyph.segments:
        boundaries_in: list[float] = []
        boundaries_out: list[float] = []
        offset_in = 0.0
        offset_out = 0.0
        for segment in glyph.segments:
            arc(offset_in, segment.incoming_arc_deg, True, theme.incoming)
            offset_in += segment.incoming_arc_deg
            if segment.incoming_arc_deg >= 2.0:
                boundaries_in.append(offset_in)
            arc(offset_out, segment.outgoing_arc_deg, False, theme.outgoing)
            offset_out -= segment.outgoing_arc_deg
            if segment.outgoing_arc_deg >= 2.0:
                boundaries_out.append(offset_out)
        for boundary in boundaries_in[:-1] + boundaries_out[:-1]:
            x0, y0 = _polar(cx, cy, r - theme.ring_width / 2 - 1, boundary)
            x1, y1 = _polar(cx, cy, r + theme.ring_width / 2 + 1, boundary)
            parts.append(
                f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(x1)}" y2="{_n(y1)}" '
                f'stroke="{theme.background}" stroke-width="1.20"/>'
            )
        parts.append(
            f'<text x="{_n(cx)}" y="{_n(cy + theme.small_font_size * 0.35)}" '
            f'font-size="{_n(theme.small_font_size + 2)}" text-anchor="middle" '
            f'fill="{theme.text}" font-weight="bold">{glyph.count}</text>'
        )
    else:
        arc(0.0, glyph.incoming_arc_deg, True, theme.incoming)
        arc(0.0, glyph.outgoing_arc_deg, False, theme.outgoing)

    parts.append(
        f'<text x="{_n(cx)}" y="{_n(cy + r + theme.ring_width + theme.small_font_size)}" '
        f'font-size="{_n(theme.small_font_size)}" text-anchor="middle" fill="{theme.text}">'
        f"{_esc(glyph.node_key if not is_meta else f'group of {glyph.count}')}</text>"
    )
    parts.append("</g>")
    return "\n".join(parts)


def _curve_offset(col_a: int, col_b: int, row_dist: int) -> float:
    span = abs(col_b - col_a)
    if row_dist == 0:
        return 16.0 + 8.0 * span
    return 8.0 + 3.0 * span + 5.0 * abs(row_dist)


def _edge_path(
    x1: float, y1: float, x2: float, y2: float, col_a: int, col_b: int, row_dist: int, trim: float
) -> str:
    dx, dy = x2 - x1, y2 - y1
    length = math.hypot(dx, dy) or 1.0
    ux, uy = dx / length, dy / length
    sx, sy = x1 + ux * trim, y1 + uy * trim
    tx, ty = x2 - ux * (trim + 4.0), y2 - uy * (trim + 4.0)
    offset = _curve_offset(col_a, col_b, row_dist)
    if row_dist == 0:
        px, py = 0.0, 1.0  # same-row edges bulge below the baseline
    else:
        px, py = -uy, ux
        if col_b < col_a:
            px, py = -px, -py
    c1x, c1y = sx + (tx - sx) / 3 + px * offset, sy + (ty - sy) / 3 + py * offset
    c2x, c2y = sx + 2 * (tx - sx) / 3 + px * offset, sy + 2 * (ty - sy) / 3 + py * offset
    return (
        f"M {_n(sx)} {_n(sy)} C {_n(c1x)} {_n(c1y)}, {_n(c2x)} {_n(c2y)}, {_n(tx)} {_n(ty)}"
    )


def render_svg(layout: LayoutModel, theme: Theme | None = None) -> str:
    """Render the full tabular sequential graph to an SVG 1.1 document."""
    if theme is None:
        theme = Theme()
    if not layout.glyphs:
        raise EmptyLayout("layout has no glyphs to render")

    header_h = 46.0
    timeline_h = 74.0
    legend_h = 46.0
    rows_h = len(layout.rows) * theme.row_height
    width = theme.canvas_width
    height = header_h + rows_h + timeline_h + legend_h + 16.0
    plot_x0 = theme.panel_width
    plot_x1 = width - 28.0
    n_cols = len(layout.columns.slots)
    col_width = (plot_x1 - plot_x0) / max(1, n_cols)

    row_index = {bank.bank_id: i for i, bank in enumerate(layout.rows)}
    column_of = layout.columns.index()

    def node_xy(node_key: str, bank_id: str) -> tuple[float, float]:
        cx = plot_x0 + (column_of[node_key] + 0.5) * col_width
        cy = header_h + row_index[bank_id] * theme.row_height + theme.row_height / 2
        return cx, cy

    glyph_by_key = {glyph.node_key: glyph for glyph in layout.glyphs}
    positions = {
        glyph.node_key: node_xy(glyph.node_key, glyph.bank_id) for glyph in layout.glyphs
    }

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_n(width)}" '
        f'height="{_n(height)}" viewBox="0 0 {_n(width)} {_n(height)}">'
    )
    out.append("<defs>")
    out.append(
        f'<linearGradient id="fraud-edge-gradient" gradientUnits="userSpaceOnUse" '
        f'x1="0" y1="0" x2="{_n(width)}" y2="0">'
        f'<stop offset="0" stop-color="{theme.fraud_gradient_start}"/>'
        f'<stop offset="1" stop-color="{theme.fraud_gradient_end}"/>'
        f"</linearGradient>"
    )
    out.append(
        f'<marker id="arrow" viewBox="0 0 10 10" refX="8" refY="5" markerWidth="7" '
        f'markerHeight="7" orient="auto-start-reverse">'
        f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{theme.neutral}"/></marker>'
    )
    out.append(
        f'<marker id="arrow-fraud" viewBox="0 0 10 10" refX="8" refY="5" markerWidth="7" '
        f'markerHeight="7" orient="auto-start-reverse">'
        f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{theme.fraud_gradient_end}"/></marker>'
    )
    out.append("</defs>")
    out.append(
        f'<rect x="0" y="0" width="{_n(width)}" height="{_n(height)}" fill="{theme.background}"/>'
    )
    out.append(
        f'<text x="{_n(plot_x0)}" y="28.00" font-size="{_n(theme.font_size + 3)}" '
        f'fill="{theme.text}" font-weight="bold">Case {_esc(layout.case_id)}</text>'
    )

    # --- bank rows -----------------------------------------------------
    summaries = {summary.bank_id: summary for summary in layout.summaries}
    out.append('<g id="rows">')
    bar_max = 74.0
    for bank in layout.rows:
        i = row_index[bank.bank_id]
        y0 = header_h + i * theme.row_height
        cy = y0 + theme.row_height / 2
        summary = summaries[bank.bank_id]
        out.append(f'<g class="bank-row" data-bank="{_esc(bank.bank_id)}">')
        out.append(
            f'<line x1="{_n(plot_x0)}" y1="{_n(cy)}" x2="{_n(plot_x1)}" y2="{_n(cy)}" '
            f'stroke="{theme.ring_base}" stroke-width="1.00"/>'
        )
        out.append(
            f'<line x1="8.00" y1="{_n(y0 + theme.row_height)}" x2="{_n(width - 8)}" '
            f'y2="{_n(y0 + theme.row_height)}" stroke="{theme.ring_base}" '
            f'stroke-width="0.50" stroke-dasharray="2 3"/>'
        )
        out.append(
            f'<text x="14.00" y="{_n(cy - 18)}" font-size="{_n(theme.font_size)}" '
            f'fill="{theme.text}" font-weight="bold">{_esc(bank.display_name)}</text>'
        )
        out.append(
            f'<text x="14.00" y="{_n(cy - 4)}" font-size="{_n(theme.small_font_size)}" '
            f'fill="{theme.text}">in {summary.incoming_txn_count} txn / '
            f"{_money(summary.incoming_total, layout.currency)}</text>"
        )
        out.append(
            f'<rect x="14.00" y="{_n(cy + 2)}" width="{_n(bar_max * summary.incoming_fraction)}" '
            f'height="5.00" fill="{theme.incoming}"/>'
        )
        out.append(
            f'<text x="14.00" y="{_n(cy + 18)}" font-size="{_n(theme.small_font_size)}" '
            f'fill="{theme.text}">out {summary.outgoing_txn_count} txn / '
            f"{_money(summary.outgoing_total, layout.currency)}</text>"
        )
        out.append(
            f'<rect x="14.00" y="{_n(cy + 22)}" width="{_n(bar_max * summary.outgoing_fraction)}" '
            f'height="5.00" fill="{theme.outgoing}"/>'
        )
        out.append("</g>")
    out.append("</g>")

    # --- edges ----------------------------------------------------------
    out.append('<g id="edges">')
    for edge in layout.edges:
        x1, y1 = positions[edge.source]
        x2, y2 = positions[edge.target]
        source_glyph = glyph_by_key[edge.source]
        target_glyph = glyph_by_key[edge.target]
        trim = (
            theme.meta_radius if source_glyph.kind is GlyphKind.META else theme.node_radius
        ) + theme.ring_width
        rows_apart = row_index[target_glyph.bank_id] - row_index[source_glyph.bank_id]
        path = _edge_path(
            x1, y1, x2, y2, column_of[edge.source], column_of[edge.target], rows_apart, trim
        )
        stroke = 'url(#fraud-edge-gradient)' if edge.fraud else theme.neutral
        marker = "arrow-fraud" if edge.fraud else "arrow"
        out.append(
            f'<path class="edge{" edge-fraud" if edge.fraud else ""}" d="{path}" fill="none" '
            f'stroke="{stroke}" stroke-width="{_n(edge.thickness)}" '
            f'marker-end="url(#{marker})" data-source="{_esc(edge.source)}" '
            f'data-target="{_esc(edge.target)}" data-count="{edge.txn_count}"/>'
        )
    out.append("</g>")

    # --- glyphs ---------------------------------------------------------
    out.append('<g id="glyphs">')
    for glyph in layout.glyphs:
        cx, cy = positions[glyph.node_key]
        out.append(render_glyph(glyph, theme, cx, cy))
    out.append("</g>")

    # --- timeline --------------------------------------------------------
    timeline_y = header_h + rows_h + 18.0
    strip_h = 38.0
    out.append('<g id="timeline">')
    out.append(
        f'<line x1="{_n(plot_x0)}" y1="{_n(timeline_y + strip_h)}" x2="{_n(plot_x1)}" '
        f'y2="{_n(timeline_y + strip_h)}" stroke="{theme.neutral}" stroke-width="1.00"/>'
    )
    bins = layout.timeline.bins
    max_count = max((b.txn_count for b in bins), default=0)
    if max_count:
        slot = (plot_x1 - plot_x0) / len(bins)
        bar_w = max(1.0, slot - 2.0)
        for i, b in enumerate(bins):
            if not b.txn_count:
                continue
            h = strip_h * b.txn_count / max_count
            x = plot_x0 + i * slot + 1.0
            out.append(
                f'<rect x="{_n(x)}" y="{_n(timeline_y + strip_h - h)}" width="{_n(bar_w)}" '
                f'height="{_n(h)}" fill="{theme.neutral}"/>'
            )
            if b.fraud_txn_count:
                fh = strip_h * b.fraud_txn_count / max_count
                out.append(
                    f'<rect x="{_n(x)}" y="{_n(timeline_y + strip_h - fh)}" width="{_n(bar_w)}" '
                    f'height="{_n(fh)}" fill="{theme.fraud_gradient_end}"/>'
                )
    first_bin = bins[0].start.astimezone(timezone.utc)
    out.append(
        f'<text x="{_n(plot_x0)}" y="{_n(timeline_y + strip_h + 13)}" '
        f'font-size="{_n(theme.small_font_size)}" fill="{theme.text}">'
        f'{first_bin.strftime("%Y-%m-%d %H:%M")} UTC</text>'
    )
    span_s = layout.maxima.case_span.total_seconds()
    out.append(
        f'<text x="{_n(plot_x1)}" y="{_n(timeline_y + strip_h + 13)}" '
        f'font-size="{_n(theme.small_font_size)}" fill="{theme.text}" text-anchor="end">'
        f"span {_n(span_s / 3600)} h</text>"
    )
    out.append("</g>")

    # --- legend -----------------------------------------------------------
    legend_y = timeline_y + strip_h + 34.0
    out.append('<g id="legend">')
    entries = (
        (theme.incoming, "incoming"),
        (theme.outgoing, "outgoing"),
        (theme.victim, "victim"),
        (theme.mule, "mule"),
        (theme.fraud_gradient_end, "fraudulent transaction"),
        (theme.neutral, "meta-node = grouped accounts"),
    )
    x = plot_x0
    for color, label in entries:
        out.append(
            f'<rect x="{_n(x)}" y="{_n(legend_y - 9)}" width="10.00" height="10.00" fill="{color}"/>'
        )
        out.append(
            f'<text x="{_n(x + 15)}" y="{_n(legend_y)}" font-size="{_n(theme.small_font_size)}" '
            f'fill="{theme.text}">{label}</text>'
        )
        x += 15 + 7.2 * len(label) + 26
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
