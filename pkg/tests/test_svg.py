"""SVG rendering: determinism, structure, glyph geometry, theming."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from datetime import timedelta

import pytest

from mltrace.fixtures import MICRO_T0
from mltrace.grouping import GroupingConfig, Scenario, group_case, identity_grouping
from mltrace.layout import GlyphKind, NodeGlyph, build_layout
from mltrace.svgrender import EmptyLayout, Theme, load_theme, render_glyph, render_svg

CFG_TIME_1H = GroupingConfig(scenario=Scenario.TIME, time_window=timedelta(hours=1), min_accounts=1)


def referenced_ids(svg: str) -> set[str]:
    return set(re.findall(r"url\(#([-\w]+)\)", svg))


def defined_ids(svg: str) -> set[str]:
    return set(re.findall(r'id="([-\w]+)"', svg))


@pytest.fixture(scope="module")
def micro_layout(micro):
    return build_layout(micro, identity_grouping(micro))


@pytest.fixture(scope="module")
def micro_grouped_layout(micro):
    return build_layout(micro, group_case(micro, CFG_TIME_1H))


class TestRenderSvg:
    def test_element_counts(self, micro_layout):
        svg = render_svg(micro_layout)
        assert svg.count('class="bank-row"') == 2
        assert svg.count('class="glyph glyph-') == 6
        assert svg.count('class="edge') == 6

    def test_byte_determinism(self, micro_grouped_layout):
        runs = {render_svg(micro_grouped_layout) for _ in range(5)}
        assert len(runs) == 1

    def test_well_formed_with_resolved_ids(self, micro_grouped_layout):
        svg = render_svg(micro_grouped_layout)
        ET.fromstring(svg)  # raises on malformed XML
        assert referenced_ids(svg) <= defined_ids(svg)

    def test_fraud_bundles_reference_gradient_once_each(self, micro_layout):
        svg = render_svg(micro_layout)
        fraud_edges = sum(1 for e in micro_layout.edges if e.fraud)
        assert fraud_edges == 1
        assert svg.count("url(#fraud-edge-gradient)") == fraud_edges

    def test_row_and_column_positions_unique(self, micro_layout):
        svg = render_svg(micro_layout)
        xs = re.findall(r'<circle cx="([0-9.]+)"', svg)
        spots = [x for x in xs]
        assert len(set(spots)) == len(micro_layout.glyphs)

    def test_empty_layout_rejected(self, micro_layout):
        from dataclasses import replace

        with pytest.raises(EmptyLayout):
            render_svg(replace(micro_layout, glyphs=()))

    def test_theme_colors_applied(self, micro_layout):
        theme = load_theme({"incoming": "#111111", "outgoing": "#222222"})
        svg = render_svg(micro_layout, theme)
        assert "#111111" in svg and "#222222" in svg


class TestRenderGlyph:
    def test_full_half_circles(self):
        glyph = NodeGlyph(
            node_key="x", bank_id="B", column=0, kind=GlyphKind.NORMAL,
            incoming_arc_deg=180.0, outgoing_arc_deg=180.0,
            incoming_total=1, outgoing_total=1,
        )
        fragment = render_glyph(glyph, Theme(), 100, 100)
        paths = re.findall(r'd="M ([0-9. ]+) A', fragment)
        assert len(paths) == 2  # both halves drawn

    def test_zero_arcs_ring_only(self):
        glyph = NodeGlyph(
            node_key="x", bank_id="B", column=0, kind=GlyphKind.NORMAL,
            incoming_arc_deg=0.0, outgoing_arc_deg=0.0,
            incoming_total=0, outgoing_total=0,
        )
        fragment = render_glyph(glyph, Theme(), 100, 100)
        assert "<path" not in fragment
        assert "<circle" in fragment

    def test_micro_meta_segments(self, micro_grouped_layout):
        svg = render_svg(micro_grouped_layout)
        meta = next(g for g in micro_grouped_layout.glyphs if g.kind is GlyphKind.META)
        assert f'>{meta.count}</text>' in svg

    def test_four_member_meta_shows_count_and_segments(self, micro):
        # a four-member group renders a central "4" and one sub-arc per
        # member per non-empty direction
        from mltrace.grouping import build_meta_node
        from tests_helpers import four_member_case

        case = four_member_case()
        meta = build_meta_node(["n1", "n2", "n3", "n4"], case)
        from mltrace.grouping import GroupingResult

        singles = tuple(
            a.account_id for a in case.accounts if a.account_id not in meta.members
        )
        node_map = {a: a for a in singles}
        node_map.update({m: meta.meta_id for m in meta.members})
        grouping = GroupingResult(
            scenario=Scenario.AMOUNT, singles=singles, metas=(meta,), node_map=node_map
        )
        layout = build_layout(case, grouping)
        glyph = next(g for g in layout.glyphs if g.kind is GlyphKind.META)
        assert glyph.count == 4
        assert len(glyph.segments) == 4
        fragment = render_glyph(glyph, Theme(), 50, 50)
        assert ">4</text>" in fragment
        arcs = fragment.count("<path")
        assert arcs <= 8  # at most 4 per direction
        assert arcs == sum(1 for s in glyph.segments if s.incoming_arc_deg > 0) + sum(
            1 for s in glyph.segments if s.outgoing_arc_deg > 0
        )

    def test_victim_mule_halos(self, micro_layout):
        svg = render_svg(micro_layout)
        theme = Theme()
        assert svg.count(f'stroke="{theme.victim}"') >= 1
        assert svg.count(f'stroke="{theme.mule}"') >= 1


class TestTheme:
    def test_defaults_valid(self):
        Theme()

    def test_bad_hex_rejected(self):
        with pytest.raises(ValueError):
            Theme(incoming="purple")

    def test_load_theme_file(self, tmp_path):
        path = tmp_path / "theme.json"
        path.write_text('{"mule": "#ff0000", "node_radius": 20}')
        theme = load_theme(path)
        assert theme.mule == "#ff0000"
        assert theme.node_radius == 20

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            load_theme({"sparkles": "#123456"})
