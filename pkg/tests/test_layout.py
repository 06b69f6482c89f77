"""Column ordering, glyph geometry, edge bundling, summaries, timeline."""

from __future__ import annotations

import json
from dataclasses import replace
from datetime import timedelta
from importlib import resources

import jsonschema
import pytest

from mltrace.fixtures import MICRO_T0
from mltrace.grouping import (
    CapExceeded,
    GroupingConfig,
    Scenario,
    build_meta_node,
    group_case,
    identity_grouping,
)
from mltrace.layout import (
    IntraGroupEdge,
    LayoutConfig,
    LayoutError,
    aggregate_edges,
    bank_summaries,
    build_layout,
    build_timeline,
    edge_thickness,
    glyph_angles,
    layout_to_dict,
    order_nodes,
)
from mltrace.model import validate_case

CFG_TIME_1H = GroupingConfig(scenario=Scenario.TIME, time_window=timedelta(hours=1), min_accounts=1)


def grouping_with(micro, members):
    """Identity grouping with one meta over the given accounts."""
    meta = build_meta_node(members, micro)
    singles = tuple(
        a.account_id for a in micro.accounts if a.account_id not in meta.members
    )
    node_map = {a: a for a in singles}
    node_map.update({m: meta.meta_id for m in meta.members})
    from mltrace.grouping import GroupingResult

    return GroupingResult(
        scenario=Scenario.AMOUNT, singles=singles, metas=(meta,), node_map=node_map
    )


class TestOrderNodes:
    def test_identity_order(self, micro):
        columns = order_nodes(micro, identity_grouping(micro))
        # first-txn times: m1/v1 tie at t0 -> lexicographic id; c1 (t+30)
        # precedes a3 (t+50)
        assert [(s.node_key, s.column) for s in columns.slots] == [
            ("m1", 0),
            ("v1", 1),
            ("a1", 2),
            ("a2", 3),
            ("c1", 4),
            ("a3", 5),
        ]

    def test_meta_takes_earliest_member_slot(self, micro):
        columns = order_nodes(micro, grouping_with(micro, ["a1", "a2"]))
        assert [(s.node_key, s.column) for s in columns.slots] == [
            ("m1", 0),
            ("v1", 1),
            ("meta:B2:a1", 2),
            ("c1", 3),
            ("a3", 4),
        ]
        meta_slot = columns.slots[2]
        assert meta_slot.first_txn == MICRO_T0 + timedelta(minutes=10)

    def test_columns_compact_bijection(self, micro):
        columns = order_nodes(micro, grouping_with(micro, ["a1", "a2", "a3"]))
        assert [s.column for s in columns.slots] == list(range(len(columns.slots)))

    def test_keys_strictly_increase(self, micro):
        columns = order_nodes(micro, identity_grouping(micro))
        keys = [(s.first_txn, s.node_key) for s in columns.slots]
        assert keys == sorted(keys)


class TestGlyphAngles:
    def test_full_half_circle(self):
        assert glyph_angles(10_000, 0, 10_000) == (180.0, 0.0)

    def test_zero(self):
        assert glyph_angles(0, 0, 10_000) == (0.0, 0.0)

    def test_micro_meta_pair(self):
        assert glyph_angles(3000, 1000, 10_000) == (54.0, 18.0)

    def test_rounding_to_tenth(self):
        # 1234/10000 * 180 = 22.212 -> 22.2
        assert glyph_angles(1234, 0, 10_000)[0] == 22.2

    def test_cap_exceeded(self):
        with pytest.raises(CapExceeded):
            glyph_angles(10_001, 0, 10_000)

    def test_bad_max(self):
        with pytest.raises(LayoutError):
            glyph_angles(0, 0, 0)


class TestAggregateEdges:
    def test_identity_six_bundles(self, micro):
        bundles = aggregate_edges(micro, identity_grouping(micro).node_map)
        assert len(bundles) == 6
        assert all(b.txn_count == 1 for b in bundles)

    def test_pair_grouping_merges(self, micro):
        bundles = aggregate_edges(micro, grouping_with(micro, ["a1", "a2"]).node_map)
        by_pair = {(b.source, b.target): b for b in bundles}
        assert len(bundles) == 4
        meta = "meta:B2:a1"
        assert by_pair[("m1", meta)].total_amount == 3000
        assert by_pair[("m1", meta)].txn_count == 2
        assert by_pair[(meta, "c1")].total_amount == 1000
        assert by_pair[(meta, "c1")].txn_count == 2

    def test_repeated_pair_merges(self, micro):
        from mltrace.model import Transaction

        extra = Transaction("t7", "m1", "a1", 200, MICRO_T0 + timedelta(minutes=55))
        case = validate_case(replace(micro, transactions=micro.transactions + (extra,)))
        bundles = aggregate_edges(case, identity_grouping(case).node_map)
        bundle = next(b for b in bundles if (b.source, b.target) == ("m1", "a1"))
        assert bundle.total_amount == 1700
        assert bundle.txn_count == 2
        assert bundle.txn_ids == ("t2", "t7")

    def test_fraud_flag_is_or(self, micro):
        bundles = aggregate_edges(micro, identity_grouping(micro).node_map)
        assert next(b for b in bundles if b.source == "v1").fraud is True
        assert next(b for b in bundles if b.target == "a1").fraud is False

    def test_intra_group_edge_rejected(self, micro):
        node_map = {a.account_id: "everything" for a in micro.accounts}
        with pytest.raises(IntraGroupEdge):
            aggregate_edges(micro, node_map)

    def test_conservation(self, micro):
        bundles = aggregate_edges(micro, grouping_with(micro, ["a1", "a2"]).node_map)
        assert sum(b.total_amount for b in bundles) == sum(t.amount for t in micro.transactions)
        assert sum(b.txn_count for b in bundles) == len(micro.transactions)


class TestEdgeThickness:
    def test_saturates_at_max(self):
        assert edge_thickness(10_000, 10_000, 1, 6) == 6.0
        assert edge_thickness(20_000, 10_000, 1, 6) == 6.0

    def test_near_zero(self):
        assert edge_thickness(1, 10_000, 1, 6) == pytest.approx(1.0, abs=0.01)

    def test_midpoint(self):
        assert edge_thickness(5_000, 10_000, 1, 6) == 3.5

    def test_monotone(self):
        values = [edge_thickness(v, 10_000, 1, 6) for v in range(0, 12_000, 500)]
        assert values == sorted(values)


class TestBankSummaries:
    def test_micro_counting_rule(self, micro):
        summaries = {s.bank_id: s for s in bank_summaries(micro)}
        b2 = summaries["B2"]
        assert (b2.incoming_txn_count, b2.incoming_total) == (4, 17_000)
        assert (b2.outgoing_txn_count, b2.outgoing_total) == (5, 8_000)
        b1 = summaries["B1"]
        assert (b1.incoming_txn_count, b1.incoming_total) == (2, 1_000)
        assert (b1.outgoing_txn_count, b1.outgoing_total) == (1, 10_000)

    def test_exactly_one_full_fraction(self, micro):
        summaries = bank_summaries(micro)
        fractions = [s.incoming_fraction for s in summaries] + [
            s.outgoing_fraction for s in summaries
        ]
        assert fractions.count(1.0) == 1
        assert all(0 <= f <= 1 for f in fractions)

    def test_single_bank_intra_counts_both_ways(self):
        from mltrace.model import Account, Bank, CaseNetwork, Role, Transaction

        case = validate_case(
            CaseNetwork(
                case_id="onebank",
                alert_account="y",
                banks=(Bank("B1", "Solo"),),
                accounts=(Account("x", "B1", Role.VICTIM), Account("y", "B1", Role.MULE)),
                transactions=(Transaction("t1", "x", "y", 700, MICRO_T0),),
            )
        )
        summary = bank_summaries(case)[0]
        assert summary.incoming_txn_count == 1
        assert summary.outgoing_txn_count == 1
        assert summary.incoming_total == summary.outgoing_total == 700


class TestBuildTimeline:
    def test_micro_five_bins(self, micro):
        model = build_timeline(micro, 5)
        assert model.bin_width == timedelta(minutes=10)
        assert [b.txn_count for b in model.bins] == [2, 1, 1, 1, 1]
        assert [b.fraud_txn_count for b in model.bins] == [1, 0, 0, 0, 0]

    def test_single_bin(self, micro):
        model = build_timeline(micro, 1)
        assert [b.txn_count for b in model.bins] == [6]

    def test_zero_span_degenerate_bin(self):
        from mltrace.model import Account, Bank, CaseNetwork, Role, Transaction

        case = validate_case(
            CaseNetwork(
                case_id="flat",
                alert_account="b",
                banks=(Bank("B1", "One"),),
                accounts=(Account("a", "B1", Role.VICTIM), Account("b", "B1", Role.MULE)),
                transactions=(
                    Transaction("t1", "a", "b", 100, MICRO_T0),
                    Transaction("t2", "b", "a", 100, MICRO_T0),
                ),
            )
        )
        model = build_timeline(case, 48)
        assert len(model.bins) == 1
        assert model.bins[0].txn_count == 2
        assert model.bin_width == timedelta(0)

    def test_bins_tile_and_conserve(self, micro):
        for n in (2, 3, 7, 48):
            model = build_timeline(micro, n)
            assert len(model.bins) == n
            assert sum(b.txn_count for b in model.bins) == 6

    def test_play_order(self, micro):
        assert build_timeline(micro, 5).play_order == ("t1", "t2", "t3", "t4", "t5", "t6")


class TestBuildLayout:
    def test_micro_identity_composition(self, micro):
        layout = build_layout(micro, identity_grouping(micro))
        assert len(layout.glyphs) == 6
        assert len(layout.edges) == 6
        assert [b.bank_id for b in layout.rows] == ["B1", "B2"]

    def test_micro_time_grouping(self, micro):
        layout = build_layout(micro, group_case(micro, CFG_TIME_1H))
        assert len(layout.glyphs) == 4
        b2_keys = {g.node_key for g in layout.glyphs if g.bank_id == "B2"}
        assert b2_keys == {"m1", "meta:B2:a1"}

    def test_sub_threshold_identity(self, micro):
        gated = group_case(
            micro, GroupingConfig(scenario=Scenario.TIME, time_window=timedelta(hours=1))
        )
        layout = build_layout(micro, gated)
        assert len(layout.glyphs) == 6
        assert layout.reduction.reduction_pct == 0.0

    def test_partition_every_account_once(self, micro):
        layout = build_layout(micro, group_case(micro, CFG_TIME_1H))
        seen: list[str] = []
        for glyph in layout.glyphs:
            if glyph.kind.value == "meta":
                seen.extend(s.account_id for s in glyph.segments)
            else:
                seen.append(glyph.node_key)
        assert sorted(seen) == sorted(a.account_id for a in micro.accounts)

    def test_deterministic(self, micro):
        one = build_layout(micro, group_case(micro, CFG_TIME_1H))
        two = build_layout(micro, group_case(micro, CFG_TIME_1H))
        assert one == two
        assert layout_to_dict(one) == layout_to_dict(two)

    def test_meta_segments_thin_flag(self, micro):
        layout = build_layout(micro, group_case(micro, CFG_TIME_1H))
        meta_glyph = next(g for g in layout.glyphs if g.kind.value == "meta")
        # a1 outgoing is 9 degrees, a3 outgoing 0: only sub-2-degree NONZERO
        # arcs count as thin
        assert [s.thin for s in meta_glyph.segments] == [False, False, False]

    def test_schema_validation(self, micro, a_like_case):
        schema = json.loads(
            resources.files("mltrace.schemas").joinpath("layout.schema.json").read_text()
        )
        for case in (micro, a_like_case):
            for config in (
                GroupingConfig(scenario=Scenario.NONE),
                GroupingConfig(
                    scenario=Scenario.TIME, time_window=timedelta(hours=12), min_accounts=1
                ),
            ):
                doc = layout_to_dict(build_layout(case, group_case(case, config)))
                jsonschema.validate(doc, schema)

    def test_layout_version(self, micro):
        doc = layout_to_dict(build_layout(micro, identity_grouping(micro)))
        assert doc["layout_version"] == 1

    def test_bin_count_config(self, micro):
        layout = build_layout(micro, identity_grouping(micro), LayoutConfig(bin_count=5))
        assert len(layout.timeline.bins) == 5
