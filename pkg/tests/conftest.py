"""Shared fixtures: the MICRO case, preset cases, and small random specs."""

from __future__ import annotations

from datetime import timedelta

import pytest

from mltrace.fixtures import micro_case
from mltrace.generator import (
    GeneratorSpec,
    generate_case,
    preset_example_a_like,
    preset_example_b_like,
)
from mltrace.grouping import GroupingConfig, Scenario


@pytest.fixture(scope="session")
def micro():
    return micro_case()


@pytest.fixture(scope="session")
def a_like_case():
    return generate_case(preset_example_a_like())


@pytest.fixture(scope="session")
def b_like_case():
    return generate_case(preset_example_b_like())


def small_spec(seed: int) -> GeneratorSpec:
    """Oracle-sized spec (at most 12 accounts, 1-3 banks), varied by seed."""
    banks = 1 + seed % 3
    accounts = max(banks, 6 + (seed * 7) % 7)  # 6..12
    return GeneratorSpec(
        seed=seed,
        banks=banks,
        accounts=accounts,
        span=timedelta(hours=2 + (seed % 5) * 12),
        victim_count=1,
        mule_count=1 + seed % 2,
        fraud_txn_rate=(seed % 4) * 0.07,
        hot_bank_count=seed % (banks + 1),
    )


def config_for(seed: int, scenario: Scenario, min_accounts: int = 1) -> GroupingConfig:
    """A deterministic threshold/window/variant combination per seed."""
    pcts = (5.0, 10.0, 20.0, 50.0, 100.0)
    windows = (
        timedelta(hours=1),
        timedelta(hours=12),
        timedelta(hours=24),
        timedelta(minutes=10),
    )
    exclude = seed % 5 == 0
    if scenario in (Scenario.AMOUNT, Scenario.COMBINED):
        return GroupingConfig(
            scenario=scenario,
            amount_threshold_pct=pcts[seed % len(pcts)],
            min_accounts=min_accounts,
            exclude_fraud_txns=exclude,
        )
    if scenario is Scenario.TIME:
        return GroupingConfig(
            scenario=scenario,
            time_window=windows[seed % len(windows)],
            min_accounts=min_accounts,
            exclude_fraud_txns=exclude,
        )
    return GroupingConfig(scenario=scenario, min_accounts=min_accounts)
