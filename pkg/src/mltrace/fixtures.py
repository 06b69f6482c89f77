"""Bundled miniature case used across tests, docs and demos."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from .model import Account, Bank, CaseNetwork, Role, Transaction, validate_case

__all__ = ["MICRO_T0", "micro_case"]

MICRO_T0 = datetime(2026, 3, 2, 9, 0, 0, tzinfo=timezone.utc)


def micro_case() -> CaseNetwork:
    """Two banks, six accounts, six transactions over fifty minutes.

    The alert transfer v1 -> m1 is the largest transaction and the largest
    directional volume, which makes glyph and threshold arithmetic easy to
    check by hand.
    """

    def at(minutes: int) -> datetime:
        return MICRO_T0 + timedelta(minutes=minutes)

    case = CaseNetwork(
        case_id="micro",
        alert_account="m1",
        banks=(
            Bank("B1", "Bank One"),
            Bank("B2", "Bank Two"),
        ),
        accounts=(
            Account("v1", "B1", Role.VICTIM),
            Account("c1", "B1", Role.NORMAL),
            Account("m1", "B2", Role.MULE),
            Account("a1", "B2", Role.NORMAL),
            Account("a2", "B2", Role.NORMAL),
            Account("a3", "B2", Role.NORMAL),
        ),
        transactions=(
            Transaction("t1", "v1", "m1", 10_000, at(0), fraud_flag=True),
            Transaction("t2", "m1", "a1", 1_500, at(10)),
            Transaction("t3", "m1", "a2", 1_500, at(20)),
            Transaction("t4", "a1", "c1", 500, at(30)),
            Transaction("t5", "a2", "c1", 500, at(40)),
            Transaction("t6", "m1", "a3", 4_000, at(50)),
        ),
        currency="EUR",
    )
    return validate_case(case)
