"""Reading and writing cases in the shared JSON and CSV formats.

JSON document shape::

    {
      "case_id": "...", "alert_account": "...", "currency": "EUR",
      "banks": [{"bank_id", "display_name"}],
      "accounts": [{"account_id", "bank_id", "role"}],
      "transactions": [{"txn_id", "source", "target", "amount_minor",
                        "timestamp", "fraud_flag"}]
    }

The CSV pair carries accounts as ``account_id,bank_id,role`` and
transactions as ``txn_id,src_account,dst_account,amount_minor,currency,
timestamp_iso8601,fraud_flag``. Bank rows are derived from the distinct
bank ids when only CSVs are supplied.

All timestamps are UTC with millisecond precision; serialisation is
byte-stable for identical cases.
"""

from __future__ import annotations

import csv
import json
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .model import (
    Account,
    Bank,
    CaseNetwork,
    InvalidRecord,
    MixedCurrency,
    Role,
    Transaction,
    validate_case,
)

__all__ = [
    "parse_timestamp",
    "format_timestamp",
    "case_to_dict",
    "case_from_dict",
    "dumps_case",
    "loads_case",
    "save_case_json",
    "load_case_json",
    "load_case_csv",
]


def parse_timestamp(value: str | int | float) -> datetime:
    """Parse an ISO-8601 string (or epoch milliseconds) into a UTC instant.

    Accepts a trailing ``Z``; naive strings are taken as UTC. Sub-millisecond
    digits are truncated.
    """
    if isinstance(value, (int, float)):
        ts = datetime.fromtimestamp(value / 1000.0, tz=timezone.utc)
    else:
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        # fromisoformat (3.10) wants exactly 3 or 6 fractional digits
        text = re.sub(
            r"\.(\d+)", lambda m: "." + m.group(1)[:6].ljust(6, "0"), text, count=1
        )
        try:
            ts = datetime.fromisoformat(text)
        except ValueError:
            raise InvalidRecord(f"unparseable timestamp {value!r}") from None
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=(ts.microsecond // 1000) * 1000)


def format_timestamp(ts: datetime) -> str:
    """Render a UTC instant as ``YYYY-MM-DDTHH:MM:SS.mmmZ``."""
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def epoch_ms(ts: datetime) -> int:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return int(ts.timestamp() * 1000)


def case_to_dict(case: CaseNetwork) -> dict[str, Any]:
    return {
        "case_id": case.case_id,
        "alert_account": case.alert_account,
        "currency": case.currency,
        "banks": [{"bank_id": b.bank_id, "display_name": b.display_name} for b in case.banks],
        "accounts": [
            {"account_id": a.account_id, "bank_id": a.bank_id, "role": a.role.value}
            for a in case.accounts
        ],
        "transactions": [
            {
                "txn_id": t.txn_id,
                "source": t.source,
                "target": t.target,
                "amount_minor": t.amount,
                "timestamp": format_timestamp(t.timestamp),
                "fraud_flag": t.fraud_flag,
            }
            for t in case.transactions
        ],
    }


def case_from_dict(doc: dict[str, Any], validate: bool = True) -> CaseNetwork:
    try:
        banks = tuple(
            Bank(bank_id=str(b["bank_id"]), display_name=str(b["display_name"]))
            for b in doc.get("banks", [])
        )
        accounts = tuple(
            Account(
                account_id=str(a["account_id"]),
                bank_id=str(a["bank_id"]),
                role=Role(a.get("role", "normal")),
            )
            for a in doc.get("accounts", [])
        )
        currencies = {str(t["currency"]) for t in doc.get("transactions", []) if "currency" in t}
        currency = str(doc.get("currency") or (sorted(currencies)[0] if currencies else "EUR"))
        if currencies - {currency}:
            raise MixedCurrency(f"case mixes currencies {sorted(currencies | {currency})}")
        transactions = tuple(
            Transaction(
                txn_id=str(t["txn_id"]),
                source=str(t["source"]),
                target=str(t["target"]),
                amount=int(t["amount_minor"]),
                timestamp=parse_timestamp(t["timestamp"]),
                fraud_flag=bool(t.get("fraud_flag", False)),
            )
            for t in doc.get("transactions", [])
        )
        case = CaseNetwork(
            case_id=str(doc["case_id"]),
            alert_account=str(doc["alert_account"]),
            banks=banks,
            accounts=accounts,
            transactions=transactions,
            currency=currency,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MixedCurrency):
            raise
        raise InvalidRecord(f"malformed case document: {exc}") from exc
    return validate_case(case) if validate else case


def dumps_case(case: CaseNetwork) -> str:
    """Serialise a case to deterministic, human-readable JSON."""
    return json.dumps(case_to_dict(case), indent=2) + "\n"


def loads_case(text: str, validate: bool = True) -> CaseNetwork:
    return case_from_dict(json.loads(text), validate=validate)


def save_case_json(case: CaseNetwork, path: str | Path) -> None:
    Path(path).write_text(dumps_case(case), encoding="utf-8")


def load_case_json(path: str | Path) -> CaseNetwork:
    return loads_case(Path(path).read_text(encoding="utf-8"))


_TRUTHY = {"true", "1", "yes", "y", "t"}


def load_case_csv(
    accounts_path: str | Path,
    transactions_path: str | Path,
    case_id: str,
    alert_account: str,
) -> CaseNetwork:
    """Build a case from the accounts/transactions CSV pair.

    Banks are synthesised from the distinct ``bank_id`` values; every
    transaction row must carry the same currency.
    """
    accounts: list[Account] = []
    with open(accounts_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            accounts.append(
                Account(
                    account_id=row["account_id"].strip(),
                    bank_id=row["bank_id"].strip(),
                    role=Role(row.get("role", "normal").strip() or "normal"),
                )
            )

    transactions: list[Transaction] = []
    currencies: set[str] = set()
    with open(transactions_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            currencies.add(row["currency"].strip())
            transactions.append(
                Transaction(
                    txn_id=row["txn_id"].strip(),
                    source=row["src_account"].strip(),
                    target=row["dst_account"].strip(),
                    amount=int(row["amount_minor"]),
                    timestamp=parse_timestamp(row["timestamp_iso8601"]),
                    fraud_flag=row.get("fraud_flag", "false").strip().lower() in _TRUTHY,
                )
            )
    if len(currencies) > 1:
        raise MixedCurrency(f"transaction CSV mixes currencies {sorted(currencies)}", case_id)

    bank_ids = sorted({account.bank_id for account in accounts})
    case = CaseNetwork(
        case_id=case_id,
        alert_account=alert_account,
        banks=tuple(Bank(bank_id=b, display_name=b) for b in bank_ids),
        accounts=tuple(accounts),
        transactions=tuple(transactions),
        currency=next(iter(currencies)) if currencies else "EUR",
    )
    return validate_case(case)
