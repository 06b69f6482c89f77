"""HTTP API serving layouts and grouping operations to the investigator UI.

The server is stateless beyond the file-backed case store: grouping
parameters and meta-node expansion travel with every request, so repeated
GETs with identical parameters return byte-identical documents.
"""

from __future__ import annotations

from datetime import timedelta
from typing import Any

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import caseio
from .grouping import (
    GroupingConfig,
    GroupingError,
    Scenario,
    UnknownMeta,
    expand_metas,
    group_case,
    reduction_report,
)
from .layout import LayoutConfig, build_layout, build_timeline, layout_to_dict
from .model import (
    CaseValidationError,
    UnknownAccount,
    account_sums,
    first_txn_times,
)
from .store import CaseStore, DuplicateCase, InvalidCaseId, UnknownCase

__all__ = ["create_app"]


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, record_id: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.record_id = record_id

    def body(self) -> dict[str, Any]:
        error: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.record_id is not None:
            error["record_id"] = self.record_id
        return {"error": error}


def _parse_config(
    scenario: str,
    threshold_pct: float | None,
    window_hours: float | None,
    min_accounts: int,
    exclude_fraud_txns: bool,
) -> GroupingConfig:
    try:
        parsed = Scenario(scenario)
    except ValueError:
        raise ApiError(422, "invalid_parameters", f"unknown scenario {scenario!r}") from None
    try:
        return GroupingConfig(
            scenario=parsed,
            amount_threshold_pct=threshold_pct,
            time_window=timedelta(hours=window_hours) if window_hours is not None else None,
            min_accounts=min_accounts,
            exclude_fraud_txns=exclude_fraud_txns,
        )
    except GroupingError as exc:
        raise ApiError(422, "invalid_parameters", str(exc)) from None


def create_app(store: CaseStore) -> FastAPI:
    app = FastAPI(title="mltrace", version="0.1.0")

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_req: Request, exc: StarletteHTTPException) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": {"code": "http_error", "message": str(exc.detail)}},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid_parameters", "message": str(exc.errors())}},
        )

    def _get_case(case_id: str):
        try:
            return store.get(case_id)
        except UnknownCase:
            raise ApiError(404, "unknown_case", f"case {case_id!r} not found") from None

    def _layout_doc(
        case_id: str,
        scenario: str,
        threshold_pct: float | None,
        window_hours: float | None,
        min_accounts: int,
        exclude_fraud_txns: bool,
        expanded: list[str],
        bins: int,
    ) -> dict[str, Any]:
        case = _get_case(case_id)
        config = _parse_config(scenario, threshold_pct, window_hours, min_accounts, exclude_fraud_txns)
        grouping = group_case(case, config)
        if expanded:
            try:
                grouping = expand_metas(case, grouping, expanded)
            except UnknownMeta as exc:
                raise ApiError(404, "unknown_meta", f"meta-node {exc.args[0]!r} not found") from None
        if bins < 1:
            raise ApiError(422, "invalid_parameters", "bins must be at least 1")
        layout = build_layout(case, grouping, LayoutConfig(bin_count=bins))
        return layout_to_dict(layout)

    @app.get("/cases")
    def list_cases() -> dict[str, Any]:
        return {"cases": [store.summary(case_id) for case_id in store.case_ids()]}

    @app.post("/cases", status_code=201)
    def ingest_case(doc: dict[str, Any] = Body(...)) -> dict[str, Any]:
        try:
            case = caseio.case_from_dict(doc)
            case_id = store.ingest(case)
        except CaseValidationError as exc:
            raise ApiError(422, type(exc).__name__, str(exc), exc.record_id) from None
        except InvalidCaseId as exc:
            raise ApiError(422, "invalid_case_id", str(exc)) from None
        except DuplicateCase as exc:
            raise ApiError(409, "duplicate_case", str(exc)) from None
        return {"case_id": case_id}

    @app.get("/cases/{case_id}/layout")
    def get_layout(
        case_id: str,
        scenario: str = "none",
        threshold_pct: float | None = None,
        window_hours: float | None = None,
        min_accounts: int = 15,
        exclude_fraud_txns: bool = False,
        expanded: list[str] = Query(default=[]),
        bins: int = 48,
    ) -> dict[str, Any]:
        return _layout_doc(
            case_id, scenario, threshold_pct, window_hours,
            min_accounts, exclude_fraud_txns, expanded, bins,
        )

    @app.post("/cases/{case_id}/layout/expand")
    def expand_layout(
        case_id: str,
        payload: dict[str, Any] = Body(...),
        scenario: str = "none",
        threshold_pct: float | None = None,
        window_hours: float | None = None,
        min_accounts: int = 15,
        exclude_fraud_txns: bool = False,
        bins: int = 48,
    ) -> dict[str, Any]:
        meta_id = payload.get("meta_id")
        if not isinstance(meta_id, str) or not meta_id:
            raise ApiError(422, "invalid_parameters", "body must carry a meta_id string")
        already = payload.get("expanded", [])
        if not isinstance(already, list):
            raise ApiError(422, "invalid_parameters", "expanded must be a list of meta ids")
        expanded = list(dict.fromkeys([*already, meta_id]))
        return _layout_doc(
            case_id, scenario, threshold_pct, window_hours,
            min_accounts, exclude_fraud_txns, expanded, bins,
        )

    @app.get("/cases/{case_id}/accounts/{account_id}")
    def account_detail(case_id: str, account_id: str) -> dict[str, Any]:
        case = _get_case(case_id)
        try:
            account = case.account(account_id)
        except UnknownAccount:
            raise ApiError(404, "unknown_account", f"account {account_id!r} not found") from None
        incoming, outgoing = account_sums(case)[account_id]
        txns = sorted(
            (t for t in case.transactions if account_id in (t.source, t.target)),
            key=lambda t: (t.timestamp, t.txn_id),
        )
        return {
            "account_id": account.account_id,
            "bank_id": account.bank_id,
            "role": account.role.value,
            "incoming_total": incoming,
            "outgoing_total": outgoing,
            "first_txn_ms": caseio.epoch_ms(first_txn_times(case)[account_id]),
            "transactions": [
                {
                    "txn_id": t.txn_id,
                    "direction": "out" if t.source == account_id else "in",
                    "counterparty": t.target if t.source == account_id else t.source,
                    "amount_minor": t.amount,
                    "timestamp": caseio.format_timestamp(t.timestamp),
                    "fraud_flag": t.fraud_flag,
                }
                for t in txns
            ],
        }

    @app.get("/cases/{case_id}/timeline")
    def timeline(case_id: str, bins: int = 48) -> dict[str, Any]:
        case = _get_case(case_id)
        if bins < 1:
            raise ApiError(422, "invalid_parameters", "bins must be at least 1")
        model = build_timeline(case, bins)
        return {
            "bin_width_ms": model.bin_width.total_seconds() * 1000,
            "bins": [
                {
                    "start_ms": caseio.epoch_ms(b.start),
                    "txn_count": b.txn_count,
                    "fraud_txn_count": b.fraud_txn_count,
                }
                for b in model.bins
            ],
            "play_order": list(model.play_order),
        }

    @app.get("/cases/{case_id}/stats")
    def stats(
        case_id: str,
        scenario: str = "none",
        threshold_pct: float | None = None,
        window_hours: float | None = None,
        min_accounts: int = 15,
        exclude_fraud_txns: bool = False,
    ) -> dict[str, Any]:
        case = _get_case(case_id)
        config = _parse_config(scenario, threshold_pct, window_hours, min_accounts, exclude_fraud_txns)
        grouping = group_case(case, config)
        report = reduction_report(len(case.accounts), grouping.node_count)
        return {
            "scenario": grouping.scenario.value,
            "nodes_before": report.nodes_before,
            "nodes_after": report.nodes_after,
            "reduction_pct": report.reduction_pct,
        }

    return app
