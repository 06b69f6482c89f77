"""Command line workflows and exit codes."""

from __future__ import annotations

import json

import pytest

from mltrace.caseio import dumps_case, format_timestamp
from mltrace.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main


@pytest.fixture()
def store_with_micro(tmp_path, micro):
    store = tmp_path / "cases"
    store.mkdir()
    (store / "micro.json").write_text(dumps_case(micro))
    return store


def run(args, capsys):
    code = main([str(a) for a in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestIngest:
    def test_json(self, tmp_path, micro, capsys):
        case_file = tmp_path / "case.json"
        case_file.write_text(dumps_case(micro))
        store = tmp_path / "store"
        code, out, _ = run(["--store", store, "ingest", case_file], capsys)
        assert code == EXIT_OK
        assert out.strip() == "micro"
        assert (store / "micro.json").exists()

    def test_duplicate_rejected(self, tmp_path, micro, capsys):
        case_file = tmp_path / "case.json"
        case_file.write_text(dumps_case(micro))
        store = tmp_path / "store"
        assert run(["--store", store, "ingest", case_file], capsys)[0] == EXIT_OK
        code, _, err = run(["--store", store, "ingest", case_file], capsys)
        assert code == EXIT_VALIDATION
        assert "already stored" in err

    def test_csv_pair(self, tmp_path, micro, capsys):
        accounts = tmp_path / "accounts.csv"
        txns = tmp_path / "transactions.csv"
        accounts.write_text(
            "account_id,bank_id,role\n"
            + "".join(f"{a.account_id},{a.bank_id},{a.role.value}\n" for a in micro.accounts)
        )
        txns.write_text(
            "txn_id,src_account,dst_account,amount_minor,currency,timestamp_iso8601,fraud_flag\n"
            + "".join(
                f"{t.txn_id},{t.source},{t.target},{t.amount},EUR,"
                f"{format_timestamp(t.timestamp)},{t.fraud_flag}\n"
                for t in micro.transactions
            )
        )
        store = tmp_path / "store"
        code, out, _ = run(
            ["--store", store, "ingest", accounts, txns, "--case-id", "csvcase",
             "--alert-account", "m1"],
            capsys,
        )
        assert code == EXIT_OK
        assert out.strip() == "csvcase"

    def test_csv_without_ids_is_usage_error(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("x")
        b.write_text("x")
        code, _, _ = run(["ingest", a, b], capsys)
        assert code == EXIT_USAGE

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, _ = run(["--store", tmp_path / "s", "ingest", tmp_path / "nope.json"], capsys)
        assert code == EXIT_IO


class TestGenerate:
    def test_preset_a_to_file(self, tmp_path, capsys):
        out = tmp_path / "a.json"
        code, _, _ = run(["generate", "--preset", "a", "--seed", "42", "--out", out], capsys)
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert len(doc["accounts"]) == 45
        assert len(doc["banks"]) == 6

    def test_spec_file(self, tmp_path, capsys):
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(
            json.dumps({"seed": 7, "banks": 2, "accounts": 8, "span_hours": 4, "mule_count": 1})
        )
        out = tmp_path / "case.json"
        code, _, _ = run(["generate", "--spec", spec_file, "--out", out], capsys)
        assert code == EXIT_OK
        assert len(json.loads(out.read_text())["accounts"]) == 8

    def test_case_id_override(self, tmp_path, capsys):
        out = tmp_path / "case.json"
        code, _, _ = run(
            ["generate", "--preset", "b", "--seed", "1", "--case-id", "b-one", "--out", out],
            capsys,
        )
        assert code == EXIT_OK
        assert json.loads(out.read_text())["case_id"] == "b-one"

    def test_infeasible_spec(self, tmp_path, capsys):
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(json.dumps({"banks": 0}))
        code, _, _ = run(["generate", "--spec", spec_file], capsys)
        assert code == EXIT_VALIDATION


class TestGroup:
    def test_stats_micro_time_example(self, store_with_micro, capsys):
        code, out, _ = run(
            ["--store", store_with_micro, "group", "--case", "micro", "--scenario", "time",
             "--window-hours", "1", "--min-accounts", "1", "--format", "stats"],
            capsys,
        )
        assert code == EXIT_OK
        assert out.splitlines() == [
            "scenario,threshold,nodes_before,nodes_after,reduction_pct",
            "time,1h,6,4,33.3",
        ]

    def test_stats_scenario_none(self, store_with_micro, capsys):
        code, out, _ = run(
            ["--store", store_with_micro, "group", "--case", "micro", "--scenario", "none",
             "--format", "stats"],
            capsys,
        )
        assert code == EXIT_OK
        assert out.splitlines()[1] == "none,-,6,6,0.0"

    def test_layout_json(self, store_with_micro, tmp_path, capsys):
        out = tmp_path / "layout.json"
        code, _, _ = run(
            ["--store", store_with_micro, "group", "--case", "micro", "--scenario", "amount",
             "--threshold-pct", "20", "--min-accounts", "1", "--format", "json", "--out", out],
            capsys,
        )
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["layout_version"] == 1
        assert len(doc["glyphs"]) == 5

    def test_svg_output(self, store_with_micro, tmp_path, capsys):
        out = tmp_path / "layout.svg"
        code, _, _ = run(
            ["--store", store_with_micro, "group", "--case", "micro", "--scenario", "none",
             "--format", "svg", "--out", out],
            capsys,
        )
        assert code == EXIT_OK
        assert out.read_text().startswith("<?xml")

    def test_unknown_case(self, store_with_micro, capsys):
        code, _, _ = run(
            ["--store", store_with_micro, "group", "--case", "ghost", "--scenario", "none"],
            capsys,
        )
        assert code == EXIT_VALIDATION

    def test_missing_threshold_is_validation_error(self, store_with_micro, capsys):
        code, _, err = run(
            ["--store", store_with_micro, "group", "--case", "micro", "--scenario", "amount"],
            capsys,
        )
        assert code == EXIT_VALIDATION
        assert "amount_threshold_pct" in err

    def test_json_errors_flag(self, store_with_micro, capsys):
        code, _, err = run(
            ["--store", store_with_micro, "--json-errors", "group", "--case", "ghost",
             "--scenario", "none"],
            capsys,
        )
        assert code == EXIT_VALIDATION
        doc = json.loads(err)
        assert doc["error"]["code"] == "UnknownCase"


class TestSweep:
    def test_nine_rows(self, store_with_micro, capsys):
        code, out, _ = run(
            ["--store", store_with_micro, "sweep", "--case", "micro", "--min-accounts", "1"],
            capsys,
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "scenario,threshold,nodes_before,nodes_after,reduction_pct"
        assert len(lines) == 10
        scenarios = [line.split(",")[0] for line in lines[1:]]
        assert scenarios == ["combined"] * 3 + ["amount"] * 3 + ["time"] * 3

    def test_gated_sweep_all_zero(self, store_with_micro, capsys):
        code, out, _ = run(["--store", store_with_micro, "sweep", "--case", "micro"], capsys)
        assert code == EXIT_OK
        assert all(line.endswith(",0.0") for line in out.strip().splitlines()[1:])


class TestUsage:
    def test_unknown_command(self, capsys):
        assert run(["frobnicate"], capsys)[0] == EXIT_USAGE

    def test_no_command(self, capsys):
        assert run([], capsys)[0] == EXIT_USAGE

    def test_env_var_store(self, tmp_path, micro, capsys, monkeypatch):
        case_file = tmp_path / "case.json"
        case_file.write_text(dumps_case(micro))
        monkeypatch.setenv("MLTRACE_STORE", str(tmp_path / "envstore"))
        code, _, _ = run(["ingest", case_file], capsys)
        assert code == EXIT_OK
        assert (tmp_path / "envstore" / "micro.json").exists()
