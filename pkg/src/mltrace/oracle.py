"""Straight-line reference grouping used only by the test suite.

Everything here is recomputed from the raw transaction list with plain
loops and ``Decimal`` arithmetic, on purpose: this module must stay
independent of the production sweep in :mod:`mltrace.grouping` so the two
can check each other. Do not refactor the two toward shared helpers.
"""

from __future__ import annotations

from decimal import Decimal

from .grouping import (
    GroupingConfig,
    GroupingError,
    GroupingResult,
    MemberSums,
    MetaNode,
    Scenario,
)
from .model import CaseNetwork, Role

__all__ = ["TooLarge", "oracle_group"]

ORACLE_BANK_LIMIT = 12


class TooLarge(GroupingError):
    pass


def _first_time(case, account_id):
    times = []
    for t in case.transactions:
        if t.source == account_id or t.target == account_id:
            times.append(t.timestamp)
    return min(times)


def _sums(case, account_id):
    incoming = 0
    outgoing = 0
    for t in case.transactions:
        if t.target == account_id:
            incoming += t.amount
        if t.source == account_id:
            outgoing += t.amount
    return incoming, outgoing


def _account_txns(case, account_id, ignore_fraud):
    out = []
    for t in case.transactions:
        if ignore_fraud and t.fraud_flag:
            continue
        if t.source == account_id or t.target == account_id:
            out.append(t)
    return out


def _groupable(case, account_id, ignore_fraud):
    for account in case.accounts:
        if account.account_id == account_id:
            if account.role == Role.VICTIM or account.role == Role.MULE:
                return False
            break
    if not ignore_fraud:
        for t in case.transactions:
            if t.fraud_flag and (t.source == account_id or t.target == account_id):
                return False
    return True


def _amounts_below(case, account_id, pct, max_txn, ignore_fraud):
    limit = Decimal(str(pct)) * Decimal(max_txn)
    for t in _account_txns(case, account_id, ignore_fraud):
        if Decimal(t.amount) * 100 >= limit:
            return False
    return True


def _has_txn_between(case, a, b):
    for t in case.transactions:
        if (t.source == a and t.target == b) or (t.source == b and t.target == a):
            return True
    return False


def _separated(case, account_id, members):
    for m in members:
        if m == account_id or _has_txn_between(case, account_id, m):
            return False
    return True


def _cap_ok(case, members, max_volume):
    total_in = 0
    total_out = 0
    for m in members:
        incoming, outgoing = _sums(case, m)
        total_in += incoming
        total_out += outgoing
    return total_in <= max_volume and total_out <= max_volume


def _talks_to_other_bank(case, account_id, bank_lookup, ignore_fraud):
    my_bank = bank_lookup[account_id]
    for t in _account_txns(case, account_id, ignore_fraud):
        other = t.target if t.source == account_id else t.source
        if bank_lookup[other] != my_bank:
            return True
    return False


def _bank_accounts_in_order(case, bank_id):
    pairs = []
    for account in case.accounts:
        if account.bank_id == bank_id:
            pairs.append((_first_time(case, account.account_id), account.account_id))
    pairs.sort()
    return [account_id for _, account_id in pairs]


def _make_meta(case, members):
    ordered = sorted(members, key=lambda m: (_first_time(case, m), m))
    sums = [(_sums(case, m)) for m in ordered]
    bank_id = None
    for account in case.accounts:
        if account.account_id == ordered[0]:
            bank_id = account.bank_id
    return MetaNode(
        meta_id=f"meta:{bank_id}:{ordered[0]}",
        bank_id=bank_id,
        members=tuple(ordered),
        member_sums=tuple(
            MemberSums(m, incoming, outgoing) for m, (incoming, outgoing) in zip(ordered, sums)
        ),
        incoming_total=sum(incoming for incoming, _ in sums),
        outgoing_total=sum(outgoing for _, outgoing in sums),
    )


def _finish(case, scenario, singles, groups):
    metas = [_make_meta(case, group) for group in groups]
    metas.sort(key=lambda meta: (_first_time(case, meta.members[0]), meta.meta_id))
    ordered_singles = sorted(singles, key=lambda a: (_first_time(case, a), a))
    node_map = {}
    for a in ordered_singles:
        node_map[a] = a
    for meta in metas:
        for m in meta.members:
            node_map[m] = meta.meta_id
    return GroupingResult(
        scenario=scenario,
        singles=tuple(ordered_singles),
        metas=tuple(metas),
        node_map=node_map,
    )


def _identity(case, scenario):
    return _finish(case, scenario, [a.account_id for a in case.accounts], [])


def oracle_group(
    case: CaseNetwork, config: GroupingConfig, max_accounts_per_bank: int = ORACLE_BANK_LIMIT
) -> GroupingResult:
    """Reference grouping for small cases.

    Raises :class:`TooLarge` when any bank holds more than
    ``max_accounts_per_bank`` accounts (raise the limit explicitly when
    freezing goldens for bigger fixtures).
    """
    for bank in case.banks:
        size = sum(1 for a in case.accounts if a.bank_id == bank.bank_id)
        if size > max_accounts_per_bank:
            raise TooLarge(f"bank {bank.bank_id!r} has {size} accounts")

    if config.scenario == Scenario.NONE or len(case.accounts) < config.min_accounts:
        return _identity(case, config.scenario)

    max_txn = max(t.amount for t in case.transactions)
    max_volume = 0
    for account in case.accounts:
        incoming, outgoing = _sums(case, account.account_id)
        max_volume = max(max_volume, incoming, outgoing)
    ignore_fraud = config.exclude_fraud_txns
    bank_lookup = {a.account_id: a.bank_id for a in case.accounts}
    min_size = config.min_group_size

    singles = []
    groups = []

    def close(run):
        if len(run) >= min_size:
            groups.append(list(run))
        else:
            singles.extend(run)

    if config.scenario == Scenario.COMBINED:
        for bank in case.banks:
            run = []
            for a in _bank_accounts_in_order(case, bank.bank_id):
                if not _groupable(case, a, ignore_fraud) or not _amounts_below(
                    case, a, config.amount_threshold_pct, max_txn, ignore_fraud
                ):
                    close(run)
                    run = []
                    singles.append(a)
                    continue
                if run and not (
                    _separated(case, a, run) and _cap_ok(case, run + [a], max_volume)
                ):
                    close(run)
                    run = [a]
                else:
                    run.append(a)
                if _talks_to_other_bank(case, a, bank_lookup, ignore_fraud):
                    close(run)
                    run = []
            close(run)
        return _finish(case, Scenario.COMBINED, singles, groups)

    if config.scenario == Scenario.AMOUNT:
        for bank in case.banks:
            group = []
            for a in _bank_accounts_in_order(case, bank.bank_id):
                if not _groupable(case, a, ignore_fraud) or not _amounts_below(
                    case, a, config.amount_threshold_pct, max_txn, ignore_fraud
                ):
                    singles.append(a)
                    continue
                if group and not (
                    _separated(case, a, group) and _cap_ok(case, group + [a], max_volume)
                ):
                    close(group)
                    group = [a]
                else:
                    group.append(a)
            close(group)
        return _finish(case, Scenario.AMOUNT, singles, groups)

    if config.scenario == Scenario.TIME:
        window = config.time_window

        def times_of(a):
            stamps = [t.timestamp for t in _account_txns(case, a, ignore_fraud)]
            return stamps

        def anchor_time(a):
            stamps = times_of(a)
            return min(stamps) if stamps else _first_time(case, a)

        for bank in case.banks:
            group = []
            for a in _bank_accounts_in_order(case, bank.bank_id):
                if not _groupable(case, a, ignore_fraud):
                    singles.append(a)
                    continue
                if group:
                    start = anchor_time(group[0])
                    end = start + window
                    if (
                        all(start <= t <= end for t in times_of(a))
                        and _separated(case, a, group)
                        and _cap_ok(case, group + [a], max_volume)
                    ):
                        group.append(a)
                        continue
                    close(group)
                    group = []
                start = anchor_time(a)
                if all(start <= t <= start + window for t in times_of(a)):
                    group = [a]
                else:
                    singles.append(a)
            close(group)
        return _finish(case, Scenario.TIME, singles, groups)

    raise GroupingError(f"unhandled scenario {config.scenario}")
