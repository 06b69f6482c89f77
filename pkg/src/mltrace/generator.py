"""Seeded synthetic laundering cases for fixtures, demos and threshold sweeps.

Patterns follow the classic playbook: layering passes money down a chain of
accounts, structuring alternates deposits and withdrawals on one account,
and smurfing fans a sum out through intermediaries and back in. Presets
reproduce only the published shape of the two study cases (account count,
bank count, time span) — nothing about the confidential networks themselves.

Generation is a pure function of its parameters: one ``random.Random(seed)``
drives every draw, timestamps land on whole seconds, and transaction ids
are assigned in chronological order, so repeated runs emit byte-identical
JSON.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone

from .model import (
    Account,
    Bank,
    CaseNetwork,
    Role,
    Transaction,
    validate_case,
)

__all__ = [
    "GeneratorSpec",
    "InfeasibleSpec",
    "generate_case",
    "preset_example_a_like",
    "preset_example_b_like",
    "PATTERNS",
]

PATTERNS = ("layering", "structuring", "smurfing")

# Fixed origin so generated cases are reproducible across machines.
_GENESIS = datetime(2026, 1, 5, 8, 0, 0, tzinfo=timezone.utc)

_HOT_BANK_WEIGHT = 4


class InfeasibleSpec(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class GeneratorSpec:
    """Parameters of one synthetic case.

    ``pattern_mix`` weights (layering, structuring, smurfing) in that order;
    ``hot_bank_count`` banks receive roughly four times the mean number of
    accounts, reproducing the bursts that clutter real layouts.
    """

    seed: int = 42
    banks: int = 4
    accounts: int = 24
    span: timedelta = timedelta(hours=12)
    pattern_mix: tuple[float, float, float] = (1.0, 1.0, 1.0)
    victim_count: int = 1
    mule_count: int = 2
    fraud_txn_rate: float = 0.05
    amount_range: tuple[int, int] = (1_000, 1_000_000)
    hot_bank_count: int = 0


def preset_example_a_like() -> GeneratorSpec:
    """45 accounts across six banks over six hours, two hot banks."""
    return GeneratorSpec(
        banks=6,
        accounts=45,
        span=timedelta(hours=6),
        victim_count=1,
        mule_count=3,
        fraud_txn_rate=0.06,
        hot_bank_count=2,
    )


def preset_example_b_like() -> GeneratorSpec:
    """38 accounts across twelve banks spanning six days."""
    return GeneratorSpec(
        banks=12,
        accounts=38,
        span=timedelta(days=6),
        victim_count=1,
        mule_count=3,
        fraud_txn_rate=0.06,
        hot_bank_count=0,
    )


def _check_spec(spec: GeneratorSpec) -> None:
    lo, hi = spec.amount_range
    if spec.banks < 1:
        raise InfeasibleSpec("need at least one bank")
    if spec.accounts < 2:
        raise InfeasibleSpec("need at least two accounts")
    if spec.victim_count < 1 or spec.mule_count < 1:
        raise InfeasibleSpec("need at least one victim and one mule")
    if spec.victim_count + spec.mule_count > spec.accounts:
        raise InfeasibleSpec("victims plus mules exceed the account count")
    if spec.banks > spec.accounts:
        raise InfeasibleSpec("more banks than accounts")
    if not 0 <= spec.fraud_txn_rate <= 1:
        raise InfeasibleSpec("fraud_txn_rate outside [0, 1]")
    if lo <= 0 or lo >= hi:
        raise InfeasibleSpec("amount_range must satisfy 0 < min < max")
    if spec.span <= timedelta(0):
        raise InfeasibleSpec("span must be positive")
    if spec.hot_bank_count < 0 or spec.hot_bank_count > spec.banks:
        raise InfeasibleSpec("hot_bank_count outside [0, banks]")
    if sum(spec.pattern_mix) <= 0 or len(spec.pattern_mix) != len(PATTERNS):
        raise InfeasibleSpec("pattern_mix must carry one positive total over the three patterns")


def _log_uniform(rng: random.Random, lo: int, hi: int) -> int:
    value = round(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return max(lo, min(hi, value))


class _Clock:
    """Hands out distinct whole-second offsets inside the case span."""

    def __init__(self, rng: random.Random, span_s: int):
        self.rng = rng
        self.span_s = max(1, span_s)
        self.used: set[int] = {0}

    def take(self, preferred: int) -> int:
        offset = max(1, min(self.span_s, preferred))
        while offset in self.used:
            offset = offset + 1 if offset < self.span_s else 1
            if len(self.used) > self.span_s:  # span saturated; collide rather than loop
                break
        self.used.add(offset)
        return offset

    def sequence(self, count: int) -> list[int]:
        """A burst: ascending offsets a few minutes apart at a random anchor."""
        if count <= 0:
            return []
        anchor = self.rng.randrange(1, self.span_s + 1)
        offsets = []
        for _ in range(count):
            offsets.append(self.take(anchor))
            anchor += self.rng.randint(30, 180)
        return offsets


def generate_case(spec: GeneratorSpec) -> CaseNetwork:
    """Build a validated synthetic case; deterministic for a given spec."""
    _check_spec(spec)
    rng = random.Random(spec.seed)
    lo, hi = spec.amount_range

    banks = tuple(
        Bank(bank_id=f"B{i + 1:02d}", display_name=f"Bank {i + 1:02d}") for i in range(spec.banks)
    )
    weights = [
        _HOT_BANK_WEIGHT if i < spec.hot_bank_count else 1 for i in range(spec.banks)
    ]

    normal_count = spec.accounts - spec.victim_count - spec.mule_count
    ids = (
        [f"v{i + 1:02d}" for i in range(spec.victim_count)]
        + [f"m{i + 1:02d}" for i in range(spec.mule_count)]
        + [f"a{i + 1:03d}" for i in range(normal_count)]
    )
    roles = (
        [Role.VICTIM] * spec.victim_count
        + [Role.MULE] * spec.mule_count
        + [Role.NORMAL] * normal_count
    )
    # Every bank gets one account up front; the rest follow the hot-bank bias.
    bank_ids = [banks[i % spec.banks].bank_id for i in range(spec.banks)]
    bank_ids += rng.choices(
        [b.bank_id for b in banks], weights=weights, k=spec.accounts - len(bank_ids)
    )
    accounts = tuple(
        Account(account_id=account_id, bank_id=bank_id, role=role)
        for account_id, role, bank_id in zip(ids, roles, bank_ids)
    )

    victims = [a.account_id for a in accounts if a.role is Role.VICTIM]
    mules = [a.account_id for a in accounts if a.role is Role.MULE]
    normals = [a.account_id for a in accounts if a.role is Role.NORMAL]

    span_s = int(spec.span.total_seconds())
    clock = _Clock(rng, span_s)
    raw: list[tuple[int, str, str, int, bool]] = []  # offset_s, source, target, amount, fraud

    def emit(offset: int, source: str, target: str, amount: int, fraud: bool) -> None:
        raw.append((offset, source, target, max(lo, min(hi, amount)), fraud))

    def flagged() -> bool:
        return rng.random() < spec.fraud_txn_rate

    # The alert: the earliest transaction, victim to mule, flagged, at the
    # top of the amount range so percentage thresholds bite predictably.
    emit(0, victims[0], mules[0], hi, True)

    # Every other victim and mule shows up in at least one alert-style
    # transfer, so pattern building only has to cover the normal accounts.
    for victim in victims[1:]:
        emit(clock.take(rng.randrange(1, span_s + 1)), victim, rng.choice(mules),
             _log_uniform(rng, lo, hi), flagged())
    for mule in mules[1:]:
        emit(clock.take(rng.randrange(1, span_s + 1)), rng.choice(victims), mule,
             _log_uniform(rng, lo, hi), flagged())

    uncovered = list(normals)
    normals_by_bank: dict[str, list[str]] = {}
    for account in accounts:
        if account.role is Role.NORMAL:
            normals_by_bank.setdefault(account.bank_id, []).append(account.account_id)

    def draw(pool: list[str], exclude: set[str]) -> str:
        fresh = [a for a in uncovered if a in pool and a not in exclude]
        if fresh:
            return fresh[0]
        return rng.choice([a for a in pool if a not in exclude])

    def mark(*chosen: str) -> None:
        for account_id in chosen:
            if account_id in uncovered:
                uncovered.remove(account_id)

    def local_pool(min_size: int) -> list[str]:
        """Normals of one bank: structuring and smurfing stay inside a single
        institution, which is what lets run-based grouping find sequences."""
        pools = [p for p in normals_by_bank.values() if len(p) >= min_size]
        if not pools:
            return normals
        fresh = [p for p in pools if any(a in uncovered for a in p)]
        return rng.choice(fresh or pools)

    bursts: list[list[tuple[str, str, int]]] = []  # (source, target, last offset) per pattern

    def add_layering() -> None:
        depth = rng.randint(2, min(4, len(normals)))
        chain = [rng.choice(victims), draw(mules, set())]
        for _ in range(depth):
            chain.append(draw(normals, set(chain)))
        offsets = clock.sequence(len(chain) - 1)
        amount = _log_uniform(rng, lo, hi)
        for i, offset in enumerate(offsets):
            emit(offset, chain[i], chain[i + 1], max(1, round(amount * 0.9**i)), flagged())
        bursts.append([(chain[i], chain[i + 1], offsets[i]) for i in range(len(offsets))])
        mark(*chain)

    def add_structuring() -> None:
        pool = local_pool(3)
        hub = draw(pool, set())
        pairs = min(rng.randint(2, 3), (len(pool) - 1) // 2)
        partners: list[str] = []
        for _ in range(pairs * 2):
            partners.append(draw(pool, {hub, *partners}))
        offsets = clock.sequence(pairs * 2)
        flows = []
        for i in range(pairs):
            amount = _log_uniform(rng, lo, hi)
            emit(offsets[2 * i], partners[2 * i], hub, amount, flagged())
            emit(offsets[2 * i + 1], hub, partners[2 * i + 1], max(1, round(amount * 0.95)), flagged())
            flows.append((partners[2 * i], hub, offsets[2 * i]))
            flows.append((hub, partners[2 * i + 1], offsets[2 * i + 1]))
        bursts.append(flows)
        mark(hub, *partners)

    def add_smurfing() -> None:
        source = draw(mules, set())
        pool = local_pool(3)
        fan = min(rng.randint(2, 4), len(pool) - 1)
        intermediaries: list[str] = []
        for _ in range(fan):
            intermediaries.append(draw(pool, {source, *intermediaries}))
        collector = draw(pool, {source, *intermediaries})
        offsets = clock.sequence(fan * 2)
        amount = _log_uniform(rng, lo, hi)
        slice_amount = max(1, amount // fan)
        flows = []
        for i, mid in enumerate(intermediaries):
            emit(offsets[i], source, mid, slice_amount, flagged())
            emit(offsets[fan + i], mid, collector, max(1, round(slice_amount * 0.95)), flagged())
            flows.append((source, mid, offsets[i]))
            flows.append((mid, collector, offsets[fan + i]))
        bursts.append(flows)
        mark(source, collector, *intermediaries)

    def add_direct_transfer() -> None:
        target = draw(normals, set())
        emit(clock.take(rng.randrange(1, span_s + 1)), rng.choice(mules), target,
             _log_uniform(rng, lo, hi), flagged())
        mark(target)

    def add_pattern() -> None:
        name = rng.choices(PATTERNS, weights=spec.pattern_mix)[0]
        if name == "layering" and len(normals) >= 2:
            add_layering()
        elif name == "structuring" and len(normals) >= 3:
            add_structuring()
        elif name == "smurfing" and len(normals) >= 3:
            add_smurfing()
        else:
            add_direct_transfer()

    def add_follow_up() -> None:
        # Echo part of an earlier burst minutes later: extra traffic between
        # already-linked pairs, so it widens no time window and adds no new
        # pair links.
        flows = rng.choice(bursts)
        repeat = rng.sample(flows, rng.randint(1, max(1, len(flows) // 2)))
        for source, target, offset in sorted(repeat, key=lambda f: f[2]):
            emit(clock.take(offset + rng.randint(60, 240)), source, target,
                 _log_uniform(rng, lo, max(lo, hi // 10)), flagged())

    if normals:
        while uncovered:
            add_pattern()
        # Extra traffic so thresholds and edge bundling see repeated flows.
        for _ in range(spec.accounts // 3):
            if bursts:
                add_follow_up()

    raw.sort(key=lambda item: item[0])
    width = max(4, len(str(len(raw))))
    transactions = tuple(
        Transaction(
            txn_id=f"t{i + 1:0{width}d}",
            source=source,
            target=target,
            amount=amount,
            timestamp=_GENESIS + timedelta(seconds=offset),
            fraud_flag=fraud,
        )
        for i, (offset, source, target, amount, fraud) in enumerate(raw)
    )

    case = CaseNetwork(
        case_id=f"synthetic-{spec.seed}",
        alert_account=mules[0],
        banks=banks,
        accounts=accounts,
        transactions=transactions,
        currency="EUR",
    )
    return validate_case(case)


def with_seed(spec: GeneratorSpec, seed: int) -> GeneratorSpec:
    return replace(spec, seed=seed)
