"""File-backed case store: one JSON document per case under a root directory."""

from __future__ import annotations

import re
import threading
from pathlib import Path
from typing import Any

from . import caseio
from .model import CaseNetwork, validate_case

__all__ = ["CaseStore", "DuplicateCase", "UnknownCase", "InvalidCaseId"]

_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class DuplicateCase(ValueError):
    pass


class UnknownCase(KeyError):
    pass


class InvalidCaseId(ValueError):
    pass


class CaseStore:
    """Desk-scale persistence: plain files, an in-memory index, one lock.

    Cases are immutable once ingested; readers share cached
    :class:`CaseNetwork` values freely.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._paths: dict[str, Path] = {}
        self._cache: dict[str, CaseNetwork] = {}
        for path in sorted(self.root.glob("*.json")):
            self._paths[path.stem] = path

    def case_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._paths)

    def __contains__(self, case_id: str) -> bool:
        with self._lock:
            return case_id in self._paths

    def ingest(self, case: CaseNetwork) -> str:
        """Persist a validated case; rejects case_id collisions."""
        validate_case(case)
        if not _SAFE_ID.match(case.case_id):
            raise InvalidCaseId(
                f"case_id {case.case_id!r} must match [A-Za-z0-9][A-Za-z0-9._-]*"
            )
        with self._lock:
            if case.case_id in self._paths:
                raise DuplicateCase(f"case {case.case_id!r} already stored")
            path = self.root / f"{case.case_id}.json"
            path.write_text(caseio.dumps_case(case), encoding="utf-8")
            self._paths[case.case_id] = path
            self._cache[case.case_id] = case
        return case.case_id

    def get(self, case_id: str) -> CaseNetwork:
        with self._lock:
            cached = self._cache.get(case_id)
            if cached is not None:
                return cached
            path = self._paths.get(case_id)
        if path is None:
            raise UnknownCase(case_id)
        case = caseio.load_case_json(path)
        with self._lock:
            self._cache[case_id] = case
        return case

    def summary(self, case_id: str) -> dict[str, Any]:
        case = self.get(case_id)
        return {
            "case_id": case.case_id,
            "alert_account": case.alert_account,
            "currency": case.currency,
            "bank_count": len(case.banks),
            "account_count": len(case.accounts),
            "txn_count": len(case.transactions),
        }
