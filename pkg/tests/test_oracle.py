"""Fast-path grouping against the straight-line oracle."""

from __future__ import annotations

from datetime import timedelta

import pytest

from conftest import config_for, small_spec
from mltrace.generator import generate_case
from mltrace.grouping import GroupingConfig, Scenario, group_case
from mltrace.oracle import TooLarge, oracle_group

SCENARIOS = (Scenario.COMBINED, Scenario.AMOUNT, Scenario.TIME)


class TestOracleMicro:
    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_each_scenario_matches(self, micro, scenario):
        config = config_for(3, scenario)
        assert group_case(micro, config) == oracle_group(micro, config)

    def test_identity_config(self, micro):
        config = GroupingConfig(scenario=Scenario.NONE, min_accounts=1)
        assert group_case(micro, config) == oracle_group(micro, config)

    def test_gated_matches(self, micro):
        config = GroupingConfig(
            scenario=Scenario.TIME, time_window=timedelta(hours=1), min_accounts=15
        )
        assert group_case(micro, config) == oracle_group(micro, config)


class TestOracleRandomised:
    @pytest.mark.parametrize("seed", range(1, 101))
    def test_equivalence(self, seed):
        case = generate_case(small_spec(seed))
        for scenario in SCENARIOS:
            config = config_for(seed, scenario)
            fast = group_case(case, config)
            slow = oracle_group(case, config)
            assert fast == slow, f"seed {seed} scenario {scenario.value}"


def test_too_large(a_like_case):
    config = GroupingConfig(scenario=Scenario.AMOUNT, amount_threshold_pct=20.0)
    with pytest.raises(TooLarge):
        oracle_group(a_like_case, config)
    # explicit limit override allows golden verification on preset fixtures
    assert oracle_group(a_like_case, config, max_accounts_per_bank=50) == group_case(
        a_like_case, config
    )
