"""Domain model for multi-bank money-laundering cases.

A case is an immutable snapshot: banks, accounts with investigation roles,
and timestamped transactions in integer minor units of a single currency.
Validation enforces referential integrity once; everything downstream
(grouping, layout, rendering, the HTTP service) treats the case as
read-only, so concurrent readers never need locks.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

__all__ = [
    "Role",
    "Bank",
    "Account",
    "Transaction",
    "CaseNetwork",
    "NetworkMaxima",
    "CaseValidationError",
    "DuplicateId",
    "DanglingReference",
    "NonPositiveAmount",
    "SelfTransfer",
    "EmptyCase",
    "EmptyBank",
    "OrphanAccount",
    "MixedCurrency",
    "InvalidRecord",
    "UnknownAccount",
    "validate_case",
    "compute_maxima",
    "account_first_txn",
    "first_txn_times",
    "account_sums",
    "transactions_by_account",
]


class Role(str, Enum):
    """Investigation role of an account."""

    NORMAL = "normal"
    VICTIM = "victim"
    MULE = "mule"


class CaseValidationError(ValueError):
    """A case record violates a model invariant.

    ``record_id`` names the offending bank/account/transaction where one
    can be identified.
    """

    def __init__(self, message: str, record_id: str | None = None):
        super().__init__(message)
        self.record_id = record_id


class DuplicateId(CaseValidationError):
    pass


class DanglingReference(CaseValidationError):
    pass


class NonPositiveAmount(CaseValidationError):
    pass


class SelfTransfer(CaseValidationError):
    pass


class EmptyCase(CaseValidationError):
    pass


class EmptyBank(CaseValidationError):
    pass


class OrphanAccount(CaseValidationError):
    pass


class MixedCurrency(CaseValidationError):
    pass


class InvalidRecord(CaseValidationError):
    pass


class UnknownAccount(KeyError):
    """An account id does not exist in the case."""


@dataclass(frozen=True, slots=True)
class Bank:
    bank_id: str
    display_name: str


@dataclass(frozen=True, slots=True)
class Account:
    account_id: str
    bank_id: str
    role: Role = Role.NORMAL


@dataclass(frozen=True, slots=True)
class Transaction:
    """A single transfer between two distinct accounts.

    ``amount`` is in integer minor units (cents); ``timestamp`` is an
    absolute instant with millisecond precision.
    """

    txn_id: str
    source: str
    target: str
    amount: int
    timestamp: datetime
    fraud_flag: bool = False


@dataclass(frozen=True, slots=True)
class CaseNetwork:
    """Immutable investigation case: the input of every computation."""

    case_id: str
    alert_account: str
    banks: tuple[Bank, ...]
    accounts: tuple[Account, ...]
    transactions: tuple[Transaction, ...]
    currency: str = "EUR"

    def bank_of(self, account_id: str) -> str:
        for account in self.accounts:
            if account.account_id == account_id:
                return account.bank_id
        raise UnknownAccount(account_id)

    def account(self, account_id: str) -> Account:
        for account in self.accounts:
            if account.account_id == account_id:
                return account
        raise UnknownAccount(account_id)


@dataclass(frozen=True, slots=True)
class NetworkMaxima:
    """Network-wide scaling bases.

    ``max_txn_amount`` anchors grouping thresholds; ``max_account_volume``
    (the largest per-account directional sum) anchors glyph arcs and the
    group cap. A directional sum contains each transaction at least once,
    so ``max_account_volume >= max_txn_amount``.
    """

    max_txn_amount: int
    max_account_volume: int
    case_span: timedelta


def validate_case(raw: CaseNetwork) -> CaseNetwork:
    """Check every model invariant and return the case unchanged.

    Raises a :class:`CaseValidationError` subclass naming the offending
    record. Idempotent: a validated case validates again to the same value.
    """
    if not raw.currency or not raw.case_id:
        raise InvalidRecord("case_id and currency must be non-empty", raw.case_id or None)

    bank_ids: set[str] = set()
    for bank in raw.banks:
        if not bank.bank_id or not bank.display_name:
            raise InvalidRecord("bank_id and display_name must be non-empty", bank.bank_id or None)
        if bank.bank_id in bank_ids:
            raise DuplicateId(f"duplicate bank_id {bank.bank_id!r}", bank.bank_id)
        bank_ids.add(bank.bank_id)

    account_ids: set[str] = set()
    for account in raw.accounts:
        if not account.account_id:
            raise InvalidRecord("account_id must be non-empty")
        if account.account_id in account_ids:
            raise DuplicateId(f"duplicate account_id {account.account_id!r}", account.account_id)
        account_ids.add(account.account_id)
        if account.bank_id not in bank_ids:
            raise DanglingReference(
                f"account {account.account_id!r} references unknown bank {account.bank_id!r}",
                account.account_id,
            )
        if not isinstance(account.role, Role):
            raise InvalidRecord(f"account {account.account_id!r} has invalid role", account.account_id)

    if not raw.transactions:
        raise EmptyCase("case has no transactions", raw.case_id)

    txn_ids: set[str] = set()
    participants: set[str] = set()
    for txn in raw.transactions:
        if not txn.txn_id:
            raise InvalidRecord("txn_id must be non-empty")
        if txn.txn_id in txn_ids:
            raise DuplicateId(f"duplicate txn_id {txn.txn_id!r}", txn.txn_id)
        txn_ids.add(txn.txn_id)
        if txn.source == txn.target:
            raise SelfTransfer(f"transaction {txn.txn_id!r} transfers to its own source", txn.txn_id)
        for endpoint in (txn.source, txn.target):
            if endpoint not in account_ids:
                raise DanglingReference(
                    f"transaction {txn.txn_id!r} names unknown account {endpoint!r}", txn.txn_id
                )
        if txn.amount <= 0:
            raise NonPositiveAmount(f"transaction {txn.txn_id!r} has amount {txn.amount}", txn.txn_id)
        participants.add(txn.source)
        participants.add(txn.target)

    if raw.alert_account not in account_ids:
        raise DanglingReference(f"alert account {raw.alert_account!r} does not exist", raw.alert_account)

    for account in raw.accounts:
        if account.account_id not in participants:
            raise OrphanAccount(
                f"account {account.account_id!r} participates in no transaction", account.account_id
            )
    accounts_per_bank = {account.bank_id for account in raw.accounts}
    for bank in raw.banks:
        if bank.bank_id not in accounts_per_bank:
            raise EmptyBank(f"bank {bank.bank_id!r} has no accounts", bank.bank_id)

    return raw


def compute_maxima(case: CaseNetwork) -> NetworkMaxima:
    """Largest single transaction, largest per-account directional volume,
    and the case's time span."""
    max_txn = max(txn.amount for txn in case.transactions)
    sums = account_sums(case)
    max_volume = max(max(incoming, outgoing) for incoming, outgoing in sums.values())
    timestamps = [txn.timestamp for txn in case.transactions]
    return NetworkMaxima(
        max_txn_amount=max_txn,
        max_account_volume=max_volume,
        case_span=max(timestamps) - min(timestamps),
    )


def first_txn_times(case: CaseNetwork) -> dict[str, datetime]:
    """Earliest transaction timestamp per account, regardless of direction."""
    first: dict[str, datetime] = {}
    for txn in case.transactions:
        for endpoint in (txn.source, txn.target):
            known = first.get(endpoint)
            if known is None or txn.timestamp < known:
                first[endpoint] = txn.timestamp
    return first


def account_first_txn(case: CaseNetwork, account_id: str) -> datetime:
    """Earliest timestamp among transactions where the account is source or target."""
    times = first_txn_times(case)
    try:
        return times[account_id]
    except KeyError:
        raise UnknownAccount(account_id) from None


def account_sums(case: CaseNetwork) -> dict[str, tuple[int, int]]:
    """(incoming, outgoing) minor-unit totals per account, over all transactions."""
    sums: dict[str, list[int]] = {account.account_id: [0, 0] for account in case.accounts}
    for txn in case.transactions:
        if txn.target in sums:
            sums[txn.target][0] += txn.amount
        if txn.source in sums:
            sums[txn.source][1] += txn.amount
    return {account_id: (incoming, outgoing) for account_id, (incoming, outgoing) in sums.items()}


def transactions_by_account(case: CaseNetwork) -> dict[str, list[Transaction]]:
    """All transactions touching each account, in input order."""
    by_account: dict[str, list[Transaction]] = {account.account_id: [] for account in case.accounts}
    for txn in case.transactions:
        if txn.source in by_account:
            by_account[txn.source].append(txn)
        if txn.target in by_account:
            by_account[txn.target].append(txn)
    return by_account
