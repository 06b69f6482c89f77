"""Node grouping: the three scenarios that collapse low-signal accounts
into per-bank meta-nodes.

General rules enforced by every scenario:

* grouping only runs on cases with at least ``min_accounts`` accounts;
* victim and mule accounts never group;
* accounts touching a fraud-flagged transaction never group, unless the
  ``exclude_fraud_txns`` variant is on, which also hides fraud-flagged
  transactions from threshold, window and cross-bank checks;
* no transaction may exist between two members of one group (pairwise,
  so aggregated edges can never form a self-loop on a meta-node);
* a group's incoming sum and outgoing sum must each stay at or below the
  network's largest per-account volume, so meta glyph arcs never exceed
  the half-circle budget.

Pair separation and the cap are always evaluated over *all* transactions,
fraud-flagged included: both exist to protect layout geometry, which draws
every transaction regardless of the variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .model import (
    CaseNetwork,
    NetworkMaxima,
    Role,
    Transaction,
    account_sums,
    compute_maxima,
    first_txn_times,
    transactions_by_account,
)

__all__ = [
    "Scenario",
    "GroupingConfig",
    "MemberSums",
    "MetaNode",
    "GroupingResult",
    "ReductionReport",
    "GroupingError",
    "CapExceeded",
    "MixedBanks",
    "InvalidCounts",
    "UnknownMeta",
    "expand_metas",
    "AMOUNT_THRESHOLD_CHOICES",
    "TIME_WINDOW_CHOICES",
    "is_groupable",
    "check_pair_separation",
    "check_group_cap",
    "group_combined",
    "group_amount",
    "group_time",
    "group_case",
    "identity_grouping",
    "build_meta_node",
    "reduction_report",
]

AMOUNT_THRESHOLD_CHOICES = (5.0, 10.0, 20.0)
TIME_WINDOW_CHOICES = (timedelta(hours=1), timedelta(hours=12), timedelta(hours=24))


class Scenario(str, Enum):
    NONE = "none"
    COMBINED = "combined"
    AMOUNT = "amount"
    TIME = "time"


class GroupingError(ValueError):
    pass


class CapExceeded(GroupingError):
    pass


class MixedBanks(GroupingError):
    pass


class InvalidCounts(GroupingError):
    pass


class UnknownMeta(KeyError):
    """A meta-node id that is not part of the grouping result."""


@dataclass(frozen=True, slots=True)
class GroupingConfig:
    """Scenario selection plus the knobs shared by all scenarios.

    ``min_accounts`` gates grouping entirely (defaults to the product rule
    of 15; unit tests override it to exercise small cases).
    """

    scenario: Scenario = Scenario.NONE
    amount_threshold_pct: float | None = None
    time_window: timedelta | None = None
    min_accounts: int = 15
    exclude_fraud_txns: bool = False
    min_group_size: int = 2

    def __post_init__(self) -> None:
        if self.scenario in (Scenario.AMOUNT, Scenario.COMBINED):
            if self.amount_threshold_pct is None:
                raise GroupingError(f"scenario {self.scenario.value} requires amount_threshold_pct")
            if not 0 < self.amount_threshold_pct <= 100:
                raise GroupingError("amount_threshold_pct must be in (0, 100]")
        if self.scenario is Scenario.TIME:
            if self.time_window is None:
                raise GroupingError("scenario time requires time_window")
            if self.time_window <= timedelta(0):
                raise GroupingError("time_window must be positive")
        if self.min_group_size < 2:
            raise GroupingError("min_group_size must be at least 2")


@dataclass(frozen=True, slots=True)
class MemberSums:
    account_id: str
    incoming: int
    outgoing: int


@dataclass(frozen=True, slots=True)
class MetaNode:
    """A grouped set of same-bank accounts, with the per-member directional
    sums that drive the meta glyph's sub-arcs."""

    meta_id: str
    bank_id: str
    members: tuple[str, ...]
    member_sums: tuple[MemberSums, ...]
    incoming_total: int
    outgoing_total: int

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True, slots=True)
class GroupingResult:
    """Partition of the case's accounts into singles and meta-nodes."""

    scenario: Scenario
    singles: tuple[str, ...]
    metas: tuple[MetaNode, ...]
    node_map: Mapping[str, str]

    @property
    def node_count(self) -> int:
        return len(self.singles) + len(self.metas)


@dataclass(frozen=True, slots=True)
class ReductionReport:
    nodes_before: int
    nodes_after: int
    reduction_pct: float


def reduction_report(before: int, after: int) -> ReductionReport:
    """Node-count reduction, as a percentage rounded half-up to 0.1."""
    if not 0 < after <= before:
        raise InvalidCounts(f"invalid node counts before={before} after={after}")
    pct = (Decimal(100) * (before - after) / Decimal(before)).quantize(
        Decimal("0.1"), rounding=ROUND_HALF_UP
    )
    return ReductionReport(nodes_before=before, nodes_after=after, reduction_pct=float(pct))


def meta_node_id(bank_id: str, anchor_account_id: str) -> str:
    """Deterministic meta-node key; anchors are unique per bank partition."""
    return f"meta:{bank_id}:{anchor_account_id}"


class _CaseView:
    """Per-case indexes for the grouping sweeps.

    ``considered`` transactions exclude fraud-flagged ones when the
    exclude-fraud variant is active; pair links and directional sums are
    always built over all transactions (layout geometry concerns).
    """

    def __init__(self, case: CaseNetwork, exclude_fraud_txns: bool):
        self.case = case
        self.exclude_fraud = exclude_fraud_txns
        self.first_txn = first_txn_times(case)
        self.sums = account_sums(case)
        self.roles = {account.account_id: account.role for account in case.accounts}
        self.banks = {account.account_id: account.bank_id for account in case.accounts}
        all_txns = transactions_by_account(case)
        self.txns = all_txns
        self.considered: dict[str, list[Transaction]] = {
            account_id: [t for t in txns if not (exclude_fraud_txns and t.fraud_flag)]
            for account_id, txns in all_txns.items()
        }
        self.fraud_involved = {
            account_id
            for account_id, txns in all_txns.items()
            if any(t.fraud_flag for t in txns)
        }
        self.linked_pairs = {
            (min(t.source, t.target), max(t.source, t.target)) for t in case.transactions
        }

    def bank_order(self, bank_id: str) -> list[str]:
        """Accounts of one bank in (first transaction, account id) order."""
        members = [a.account_id for a in self.case.accounts if a.bank_id == bank_id]
        members.sort(key=lambda account_id: (self.first_txn[account_id], account_id))
        return members

    def groupable(self, account_id: str) -> tuple[bool, str | None]:
        role = self.roles[account_id]
        if role is Role.VICTIM:
            return False, "victim"
        if role is Role.MULE:
            return False, "mule"
        if not self.exclude_fraud and account_id in self.fraud_involved:
            return False, "fraud_involvement"
        return True, None

    def amounts_qualify(self, account_id: str, threshold_pct: float, max_txn: int) -> bool:
        # Strict "<": a transaction exactly at the threshold disqualifies.
        limit = Fraction(str(threshold_pct)) * max_txn
        return all(Fraction(t.amount) * 100 < limit for t in self.considered[account_id])

    def has_cross_bank_txn(self, account_id: str) -> bool:
        bank = self.banks[account_id]
        for txn in self.considered[account_id]:
            other = txn.target if txn.source == account_id else txn.source
            if self.banks[other] != bank:
                return True
        return False

    def separated_from_all(self, account_id: str, members: Iterable[str]) -> bool:
        return all(
            (min(account_id, m), max(account_id, m)) not in self.linked_pairs and account_id != m
            for m in members
        )

    def cap_holds(self, members: Iterable[str], maxima: NetworkMaxima) -> bool:
        incoming = sum(self.sums[m][0] for m in members)
        outgoing = sum(self.sums[m][1] for m in members)
        return incoming <= maxima.max_account_volume and outgoing <= maxima.max_account_volume

    def considered_times(self, account_id: str) -> list[datetime]:
        return [t.timestamp for t in self.considered[account_id]]


def is_groupable(account_id: str, case: CaseNetwork, config: GroupingConfig) -> tuple[bool, str | None]:
    """Whether an account may ever join a group, with the blocking reason.

    Reasons: ``victim``, ``mule``, ``fraud_involvement``. The fraud rule is
    lifted when ``config.exclude_fraud_txns`` is set.
    """
    return _CaseView(case, config.exclude_fraud_txns).groupable(account_id)


def check_pair_separation(a: str, b: str, case: CaseNetwork) -> bool:
    """True iff no transaction links the two accounts in either direction.

    ``(a, a)`` is False by convention. Applied pairwise within candidate
    groups to rule out circular meta-edges.
    """
    if a == b:
        return False
    return all(
        not ((t.source == a and t.target == b) or (t.source == b and t.target == a))
        for t in case.transactions
    )


def check_group_cap(members: Iterable[str], case: CaseNetwork, maxima: NetworkMaxima) -> bool:
    """True iff the group's incoming and outgoing sums each stay within the
    largest per-account volume (inclusive: "should not exceed")."""
    sums = account_sums(case)
    incoming = sum(sums[m][0] for m in members)
    outgoing = sum(sums[m][1] for m in members)
    return incoming <= maxima.max_account_volume and outgoing <= maxima.max_account_volume


def build_meta_node(
    members: Iterable[str], case: CaseNetwork, maxima: NetworkMaxima | None = None
) -> MetaNode:
    """Materialise a meta-node: members ordered by first transaction, with
    per-member directional sums over all their transactions."""
    member_list = list(members)
    if maxima is None:
        maxima = compute_maxima(case)
    banks = {case.bank_of(m) for m in member_list}
    if len(banks) != 1:
        raise MixedBanks(f"meta-node members span banks {sorted(banks)}")
    bank_id = banks.pop()
    first = first_txn_times(case)
    member_list.sort(key=lambda account_id: (first[account_id], account_id))
    sums = account_sums(case)
    member_sums = tuple(MemberSums(m, sums[m][0], sums[m][1]) for m in member_list)
    incoming_total = sum(s.incoming for s in member_sums)
    outgoing_total = sum(s.outgoing for s in member_sums)
    if incoming_total > maxima.max_account_volume or outgoing_total > maxima.max_account_volume:
        raise CapExceeded(
            f"meta-node sums ({incoming_total}, {outgoing_total}) exceed "
            f"max account volume {maxima.max_account_volume}"
        )
    return MetaNode(
        meta_id=meta_node_id(bank_id, member_list[0]),
        bank_id=bank_id,
        members=tuple(member_list),
        member_sums=member_sums,
        incoming_total=incoming_total,
        outgoing_total=outgoing_total,
    )


def identity_grouping(case: CaseNetwork, scenario: Scenario = Scenario.NONE) -> GroupingResult:
    """Every account stands alone."""
    first = first_txn_times(case)
    singles = sorted(
        (account.account_id for account in case.accounts),
        key=lambda account_id: (first[account_id], account_id),
    )
    return GroupingResult(
        scenario=scenario,
        singles=tuple(singles),
        metas=(),
        node_map={account_id: account_id for account_id in singles},
    )


class _Partition:
    """Accumulates singles and closed groups during a sweep."""

    def __init__(self, view: _CaseView, maxima: NetworkMaxima, min_group_size: int):
        self.view = view
        self.maxima = maxima
        self.min_group_size = min_group_size
        self.singles: list[str] = []
        self.groups: list[list[str]] = []

    def close(self, run: list[str]) -> None:
        if len(run) >= self.min_group_size:
            self.groups.append(list(run))
        else:
            self.singles.extend(run)

    def result(self, scenario: Scenario) -> GroupingResult:
        view = self.view
        metas = [build_meta_node(group, view.case, self.maxima) for group in self.groups]
        metas.sort(key=lambda meta: (view.first_txn[meta.members[0]], meta.meta_id))
        singles = sorted(self.singles, key=lambda a: (view.first_txn[a], a))
        node_map: dict[str, str] = {a: a for a in singles}
        for meta in metas:
            for member in meta.members:
                node_map[member] = meta.meta_id
        return GroupingResult(
            scenario=scenario, singles=tuple(singles), metas=tuple(metas), node_map=node_map
        )


def _gated(case: CaseNetwork, config: GroupingConfig) -> bool:
    return len(case.accounts) < config.min_accounts


def group_combined(
    case: CaseNetwork, config: GroupingConfig, maxima: NetworkMaxima | None = None
) -> GroupingResult:
    """Amount + first-transaction-order grouping.

    Sweeps each bank's accounts in first-transaction order, extending a run
    of consecutive accounts whose every considered transaction stays under
    the amount threshold. Non-groupable or over-threshold accounts close the
    run and stand alone; a pair-separation or cap conflict closes the run
    and restarts it at the conflicting account; an account transacting with
    another bank joins first, then closes the run behind itself.
    """
    if maxima is None:
        maxima = compute_maxima(case)
    if _gated(case, config):
        return identity_grouping(case, Scenario.COMBINED)
    assert config.amount_threshold_pct is not None
    view = _CaseView(case, config.exclude_fraud_txns)
    partition = _Partition(view, maxima, config.min_group_size)

    for bank in case.banks:
        run: list[str] = []
        for account_id in view.bank_order(bank.bank_id):
            ok, _ = view.groupable(account_id)
            if not ok or not view.amounts_qualify(
                account_id, config.amount_threshold_pct, maxima.max_txn_amount
            ):
                partition.close(run)
                run = []
                partition.singles.append(account_id)
                continue
            if run and not (
                view.separated_from_all(account_id, run)
                and view.cap_holds(run + [account_id], maxima)
            ):
                partition.close(run)
                run = [account_id]
            else:
                run.append(account_id)
            if view.has_cross_bank_txn(account_id):
                partition.close(run)
                run = []
        partition.close(run)

    return partition.result(Scenario.COMBINED)


def group_amount(
    case: CaseNetwork, config: GroupingConfig, maxima: NetworkMaxima | None = None
) -> GroupingResult:
    """Amount-only grouping, discarding transaction order.

    Eligible accounts (groupable, every considered amount under the
    threshold) are packed greedily per bank in first-transaction order; a
    cap or pair-separation conflict starts a new group at the conflicting
    account. Ineligible accounts in between do not interrupt packing.
    """
    if maxima is None:
        maxima = compute_maxima(case)
    if _gated(case, config):
        return identity_grouping(case, Scenario.AMOUNT)
    assert config.amount_threshold_pct is not None
    view = _CaseView(case, config.exclude_fraud_txns)
    partition = _Partition(view, maxima, config.min_group_size)

    for bank in case.banks:
        group: list[str] = []
        for account_id in view.bank_order(bank.bank_id):
            ok, _ = view.groupable(account_id)
            if not ok or not view.amounts_qualify(
                account_id, config.amount_threshold_pct, maxima.max_txn_amount
            ):
                partition.singles.append(account_id)
                continue
            if group and not (
                view.separated_from_all(account_id, group)
                and view.cap_holds(group + [account_id], maxima)
            ):
                partition.close(group)
                group = [account_id]
            else:
                group.append(account_id)
        partition.close(group)

    return partition.result(Scenario.AMOUNT)


def group_time(
    case: CaseNetwork, config: GroupingConfig, maxima: NetworkMaxima | None = None
) -> GroupingResult:
    """Time-window grouping.

    Per bank, the first groupable account anchors a window starting at its
    first considered transaction; an account joins while all its considered
    transactions fall inside the window and cap/pair-separation hold,
    otherwise the group closes and the account anchors a new window. An
    account whose own activity outlasts the window can never group and
    stands alone.
    """
    if maxima is None:
        maxima = compute_maxima(case)
    if _gated(case, config):
        return identity_grouping(case, Scenario.TIME)
    assert config.time_window is not None
    view = _CaseView(case, config.exclude_fraud_txns)
    partition = _Partition(view, maxima, config.min_group_size)

    def anchor_start(account_id: str) -> datetime:
        times = view.considered_times(account_id)
        # Variant edge case: an account whose every transaction is ignored
        # still anchors, at its overall first transaction.
        return min(times) if times else view.first_txn[account_id]

    for bank in case.banks:
        group: list[str] = []
        window_end: datetime | None = None

        for account_id in view.bank_order(bank.bank_id):
            ok, _ = view.groupable(account_id)
            if not ok:
                partition.singles.append(account_id)
                continue
            times = view.considered_times(account_id)
            if group and window_end is not None:
                start = anchor_start(group[0])
                fits = all(start <= t <= window_end for t in times)
                if (
                    fits
                    and view.separated_from_all(account_id, group)
                    and view.cap_holds(group + [account_id], maxima)
                ):
                    group.append(account_id)
                    continue
                partition.close(group)
            start = anchor_start(account_id)
            if all(start <= t <= start + config.time_window for t in times):
                group = [account_id]
                window_end = start + config.time_window
            else:
                # Own transactions span more than the window: never groupable.
                partition.singles.append(account_id)
                group = []
                window_end = None
        partition.close(group)

    return partition.result(Scenario.TIME)


_SCENARIO_FNS = {
    Scenario.COMBINED: group_combined,
    Scenario.AMOUNT: group_amount,
    Scenario.TIME: group_time,
}


def group_case(
    case: CaseNetwork, config: GroupingConfig, maxima: NetworkMaxima | None = None
) -> GroupingResult:
    """Run the configured scenario (or the identity partition for ``none``)."""
    if config.scenario is Scenario.NONE:
        return identity_grouping(case)
    return _SCENARIO_FNS[config.scenario](case, config, maxima)


def expand_metas(
    case: CaseNetwork, grouping: GroupingResult, meta_ids: Iterable[str]
) -> GroupingResult:
    """Dissolve the named meta-nodes back into single accounts.

    A pure view operation: the other groups stay intact and the case itself
    never changes, so re-grouping with the same config restores the
    original partition.
    """
    wanted = set(meta_ids)
    known = {meta.meta_id for meta in grouping.metas}
    missing = sorted(wanted - known)
    if missing:
        raise UnknownMeta(missing[0])
    if not wanted:
        return grouping
    first = first_txn_times(case)
    singles = list(grouping.singles)
    kept: list[MetaNode] = []
    for meta in grouping.metas:
        if meta.meta_id in wanted:
            singles.extend(meta.members)
        else:
            kept.append(meta)
    singles.sort(key=lambda account_id: (first[account_id], account_id))
    node_map: dict[str, str] = {account_id: account_id for account_id in singles}
    for meta in kept:
        for member in meta.members:
            node_map[member] = meta.meta_id
    return GroupingResult(
        scenario=grouping.scenario,
        singles=tuple(singles),
        metas=tuple(kept),
        node_map=node_map,
    )
