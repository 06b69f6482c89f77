"""Command line workflows: ingest, generate, group, sweep, serve.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 64 usage error.
``--json-errors`` mirrors failures as machine-readable JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from datetime import timedelta
from pathlib import Path

from . import caseio
from .generator import (
    GeneratorSpec,
    InfeasibleSpec,
    generate_case,
    preset_example_a_like,
    preset_example_b_like,
)
from .grouping import (
    AMOUNT_THRESHOLD_CHOICES,
    TIME_WINDOW_CHOICES,
    GroupingConfig,
    GroupingError,
    Scenario,
    group_case,
    reduction_report,
)
from .layout import LayoutConfig, build_layout, layout_to_dict
from .model import CaseValidationError
from .store import CaseStore, DuplicateCase, InvalidCaseId, UnknownCase
from .svgrender import load_theme, render_svg

__all__ = ["main", "sweep_rows", "STATS_HEADER"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64

STATS_HEADER = ("scenario", "threshold", "nodes_before", "nodes_after", "reduction_pct")

_VALIDATION_ERRORS = (
    CaseValidationError,
    GroupingError,
    InfeasibleSpec,
    DuplicateCase,
    InvalidCaseId,
    UnknownCase,
    ValueError,
    KeyError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 64, not argparse's default 2
        raise UsageError(message)


def _add_store_flag(parser: argparse.ArgumentParser) -> None:
    # accepted both before and after the subcommand
    parser.add_argument(
        "--store",
        default=argparse.SUPPRESS,
        help="case store directory (default ./cases, env MLTRACE_STORE)",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="mltrace", description=__doc__)
    parser.add_argument("--store", default=None, help=argparse.SUPPRESS)
    parser.add_argument("--json-errors", action="store_true", help="emit machine-readable error JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="store a case from JSON or an accounts/transactions CSV pair")
    _add_store_flag(p_ingest)
    p_ingest.add_argument("paths", nargs="+", help="case.json, or accounts.csv transactions.csv")
    p_ingest.add_argument("--case-id", help="case id (required for CSV input)")
    p_ingest.add_argument("--alert-account", help="alerted account id (required for CSV input)")

    p_generate = sub.add_parser("generate", help="generate a synthetic case")
    p_generate.add_argument(
        "--preset", choices=["a", "b"],
        help="preset shape: a = 45 accounts/6 banks/6h, b = 38 accounts/12 banks/6d",
    )
    p_generate.add_argument("--spec", help="JSON file with generator parameters")
    p_generate.add_argument("--seed", type=int, default=None)
    p_generate.add_argument("--case-id", default=None)
    p_generate.add_argument("--out", default=None, help="output path (default stdout)")

    p_group = sub.add_parser("group", help="group a stored case and emit layout, SVG, or stats")
    _add_store_flag(p_group)
    p_group.add_argument("--case", required=True)
    p_group.add_argument("--scenario", required=True, choices=[s.value for s in Scenario])
    p_group.add_argument("--threshold-pct", type=float, default=None)
    p_group.add_argument("--window-hours", type=float, default=None)
    p_group.add_argument("--min-accounts", type=int, default=15)
    p_group.add_argument("--exclude-fraud-txns", action="store_true")
    p_group.add_argument("--format", choices=["svg", "json", "stats"], default="json")
    p_group.add_argument("--bins", type=int, default=48)
    p_group.add_argument("--theme", default=None, help="theme JSON file for SVG output")
    p_group.add_argument("--out", default=None, help="output path (default stdout)")

    p_sweep = sub.add_parser("sweep", help="all scenarios x default thresholds, as a stats CSV")
    _add_store_flag(p_sweep)
    p_sweep.add_argument("--case", required=True)
    p_sweep.add_argument("--min-accounts", type=int, default=15)
    p_sweep.add_argument("--exclude-fraud-txns", action="store_true")
    p_sweep.add_argument("--out", default=None)

    p_serve = sub.add_parser("serve", help="serve the HTTP API over a case store")
    _add_store_flag(p_serve)
    p_serve.add_argument("--port", type=int, default=7731)
    p_serve.add_argument("--host", default="127.0.0.1")

    return parser


def _resolve_store(args: argparse.Namespace) -> CaseStore:
    root = args.store or os.environ.get("MLTRACE_STORE") or "./cases"
    return CaseStore(root)


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _stats_csv(rows: list[tuple]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(STATS_HEADER)
    writer.writerows(rows)
    return buffer.getvalue()


def _threshold_label(config: GroupingConfig) -> str:
    if config.scenario in (Scenario.AMOUNT, Scenario.COMBINED):
        return f"{config.amount_threshold_pct:g}%"
    if config.scenario is Scenario.TIME:
        return f"{config.time_window.total_seconds() / 3600:g}h"
    return "-"


def _stats_row(case, config: GroupingConfig) -> tuple:
    grouping = group_case(case, config)
    report = reduction_report(len(case.accounts), grouping.node_count)
    return (
        config.scenario.value,
        _threshold_label(config),
        report.nodes_before,
        report.nodes_after,
        f"{report.reduction_pct:.1f}",
    )


def sweep_rows(case, min_accounts: int = 15, exclude_fraud_txns: bool = False) -> list[tuple]:
    """The nine scenario/threshold combinations used by ``sweep``."""
    rows = []
    for scenario in (Scenario.COMBINED, Scenario.AMOUNT):
        for pct in AMOUNT_THRESHOLD_CHOICES:
            config = GroupingConfig(
                scenario=scenario,
                amount_threshold_pct=pct,
                min_accounts=min_accounts,
                exclude_fraud_txns=exclude_fraud_txns,
            )
            rows.append(_stats_row(case, config))
    for window in TIME_WINDOW_CHOICES:
        config = GroupingConfig(
            scenario=Scenario.TIME,
            time_window=window,
            min_accounts=min_accounts,
            exclude_fraud_txns=exclude_fraud_txns,
        )
        rows.append(_stats_row(case, config))
    return rows


def _cmd_ingest(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    paths = [Path(p) for p in args.paths]
    if len(paths) == 1 and paths[0].suffix.lower() == ".json":
        case = caseio.load_case_json(paths[0])
    elif len(paths) == 2:
        if not args.case_id or not args.alert_account:
            raise UsageError("CSV ingestion requires --case-id and --alert-account")
        case = caseio.load_case_csv(paths[0], paths[1], args.case_id, args.alert_account)
    else:
        raise UsageError("expected one case.json or an accounts.csv transactions.csv pair")
    case_id = store.ingest(case)
    print(case_id)
    return EXIT_OK


def _spec_from_file(path: str) -> GeneratorSpec:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    kwargs = dict(doc)
    if "span_hours" in kwargs:
        kwargs["span"] = timedelta(hours=float(kwargs.pop("span_hours")))
    if "amount_range" in kwargs:
        kwargs["amount_range"] = tuple(kwargs["amount_range"])
    if "pattern_mix" in kwargs:
        kwargs["pattern_mix"] = tuple(kwargs["pattern_mix"])
    return GeneratorSpec(**kwargs)


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.preset and args.spec:
        raise UsageError("choose either --preset or --spec")
    if args.preset == "a":
        spec = preset_example_a_like()
    elif args.preset == "b":
        spec = preset_example_b_like()
    elif args.spec:
        spec = _spec_from_file(args.spec)
    else:
        spec = GeneratorSpec()
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    case = generate_case(spec)
    if args.case_id:
        from .model import validate_case

        case = validate_case(replace(case, case_id=args.case_id))
    _write_out(caseio.dumps_case(case), args.out)
    return EXIT_OK


def _config_from_args(args: argparse.Namespace) -> GroupingConfig:
    return GroupingConfig(
        scenario=Scenario(args.scenario),
        amount_threshold_pct=args.threshold_pct,
        time_window=timedelta(hours=args.window_hours) if args.window_hours is not None else None,
        min_accounts=args.min_accounts,
        exclude_fraud_txns=args.exclude_fraud_txns,
    )


def _cmd_group(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    case = store.get(args.case)
    config = _config_from_args(args)
    if args.format == "stats":
        _write_out(_stats_csv([_stats_row(case, config)]), args.out)
        return EXIT_OK
    grouping = group_case(case, config)
    layout = build_layout(case, grouping, LayoutConfig(bin_count=args.bins))
    if args.format == "json":
        _write_out(json.dumps(layout_to_dict(layout), indent=2) + "\n", args.out)
    else:
        _write_out(render_svg(layout, load_theme(args.theme)), args.out)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    case = store.get(args.case)
    rows = sweep_rows(case, args.min_accounts, args.exclude_fraud_txns)
    _write_out(_stats_csv(rows), args.out)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(_resolve_store(args))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "generate": _cmd_generate,
    "group": _cmd_group,
    "sweep": _cmd_sweep,
    "serve": _cmd_serve,
}


def _emit_error(args_json: bool, code: str, message: str, record_id: str | None = None) -> None:
    if args_json:
        error: dict = {"code": code, "message": message}
        if record_id is not None:
            error["record_id"] = record_id
        sys.stderr.write(json.dumps({"error": error}) + "\n")
    else:
        sys.stderr.write(f"mltrace: error: {message}\n")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    json_errors = "--json-errors" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _emit_error(json_errors, "usage", str(exc))
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _emit_error(args.json_errors, "usage", str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _emit_error(args.json_errors, "io_error", str(exc))
        return EXIT_IO
    except _VALIDATION_ERRORS as exc:
        record_id = getattr(exc, "record_id", None)
        message = exc.args[0] if exc.args else str(exc)
        _emit_error(args.json_errors, type(exc).__name__, str(message), record_id)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
