"""CLI surface: commands, exit codes, format stability, golden outputs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from flowkit.cli import EXIT_FINDINGS, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCheck:
    def test_clean_fixture_exits_zero(self, capsys):
        code, out, _ = run_cli(capsys, "check", FIXTURES / "phone_chart.flow.json")
        assert code == EXIT_OK
        assert "risk: app 1/5 (low)" in out

    def test_miswire_exits_one_with_single_error(self, capsys):
        code, out, _ = run_cli(capsys, "check", FIXTURES / "accel_miswire.flow.json")
        assert code == EXIT_FINDINGS
        assert out.count("wire-incompatible") == 1

    def test_malformed_file_exits_two(self, capsys, tmp_path):
        bad = tmp_path / "bad.flow.json"
        bad.write_text("{nope")
        code, _, err = run_cli(capsys, "check", bad)
        assert code == EXIT_USAGE
        assert "invalid flow file" in err

    def test_json_output_stable_and_parsable(self, capsys):
        code, out1, _ = run_cli(capsys, "check", FIXTURES / "feed_merge.flow.json", "--format", "json")
        assert code == EXIT_OK
        code, out2, _ = run_cli(capsys, "check", FIXTURES / "feed_merge.flow.json", "--format", "json")
        assert out1 == out2
        data = json.loads(out1)
        assert set(data) == {"diagnostics", "labels", "risk"}
        badge_wires = [w for w in data["labels"]["wires"] if any(a["cat"] == "identifier" for a in w["atoms"])]
        assert badge_wires

    def test_fail_on_warn(self, capsys, tmp_path):
        doc = {
            "id": "w", "nodes": [{"id": "log", "spec": "debug", "config": {}}], "wires": [],
        }
        path = tmp_path / "warn.flow.json"
        path.write_text(json.dumps(doc))
        code, _, _ = run_cli(capsys, "check", path)
        assert code == EXIT_OK
        code, _, _ = run_cli(capsys, "check", path, "--fail-on", "warn")
        assert code == EXIT_FINDINGS


class TestManifest:
    def test_golden_bytes(self, capsys, tmp_path):
        out_path = tmp_path / "m.json"
        code, _, _ = run_cli(
            capsys, "manifest", FIXTURES / "phone_chart.flow.json",
            "--meta", FIXTURES / "meta.json", "-o", out_path,
        )
        assert code == EXIT_OK
        assert out_path.read_bytes() == (GOLDEN / "phone_chart.manifest.json").read_bytes()

    def test_stdout_when_no_output_path(self, capsys):
        code, out, _ = run_cli(
            capsys, "manifest", FIXTURES / "phone_chart.flow.json", "--meta", FIXTURES / "meta.json"
        )
        assert code == EXIT_OK
        assert out.encode() == (GOLDEN / "phone_chart.manifest.json").read_bytes()

    def test_missing_meta_field_listed(self, capsys):
        code, _, err = run_cli(
            capsys, "manifest", FIXTURES / "phone_chart.flow.json",
            "--meta", FIXTURES / "meta_missing.json",
        )
        assert code == EXIT_FINDINGS
        assert "retention" in err


class TestRun:
    def test_office_profile_reports_zero_firings(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", FIXTURES / "light_trigger.flow.json",
            "--seed", 11, "--duration", 1000, "--profile", "lamp=office lighting",
        )
        assert code == EXIT_OK
        assert "node alarm: emitted 0" in out

    def test_same_seed_identical_log_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for path in (a, b):
            code, _, _ = run_cli(
                capsys, "run", FIXTURES / "feed_merge.flow.json",
                "--seed", 4, "--duration", 30000, "--provenance", path,
            )
            assert code == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_unchecked_flow_refused(self, capsys):
        code, _, err = run_cli(
            capsys, "run", FIXTURES / "accel_miswire.flow.json", "--seed", 1, "--duration", 100
        )
        assert code == EXIT_FINDINGS
        assert "refusing to run" in err


class TestInspect:
    @pytest.fixture()
    def log_path(self, capsys, tmp_path):
        path = tmp_path / "run.jsonl"
        run_cli(
            capsys, "run", FIXTURES / "phone_chart.flow.json",
            "--seed", 3, "--duration", 3000, "--provenance", path,
        )
        return path

    def test_lineage_two_ancestors(self, capsys, log_path):
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
        final = [r for r in records if r["kind"] == "consume" and r["node"] == "screen"][0]
        code, out, _ = run_cli(capsys, "inspect", log_path, "--message", final["msg"], "--format", "json")
        assert code == EXIT_OK
        tree = json.loads(out)
        assert tree["node"] == "chart"
        assert tree["parents"][0]["node"] == "phone"
        assert tree["parents"][0]["parents"] == []

    def test_window_full_range_counts(self, capsys, log_path):
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
        expected = len([r for r in records if r["node"] == "phone"])
        code, out, _ = run_cli(
            capsys, "inspect", log_path, "--node", "phone", "--window", "0..3000", "--format", "json"
        )
        assert code == EXIT_OK
        assert len(json.loads(out)) == expected

    def test_unknown_node_exits_two(self, capsys, log_path):
        code, _, _ = run_cli(capsys, "inspect", log_path, "--node", "ghost")
        assert code == EXIT_USAGE

    def test_usage_error_without_selector(self, capsys, log_path):
        code, _, _ = run_cli(capsys, "inspect", log_path)
        assert code == EXIT_USAGE


class TestExitCodes:
    def test_unknown_command_usage(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "check", "no/such/file.json")
        assert code == EXIT_USAGE


class TestUserSpecs:
    def test_specs_dir_extends_registry(self, capsys, tmp_path):
        from flowkit.library import builtin_specs
        from flowkit.model import spec_to_json

        # a user-authored clone of the debug node under a new id, pure JSON
        spec = json.loads(json.dumps(spec_to_json(builtin_specs().get("debug"))))
        spec["id"] = "my-sink"
        specs_dir = tmp_path / "specs"
        specs_dir.mkdir()
        (specs_dir / "my-sink.json").write_text(json.dumps(spec))
        doc = {
            "id": "custom",
            "nodes": [
                {"id": "lamp", "spec": "light", "config": {"period": 1000}},
                {"id": "sink", "spec": "my-sink", "config": {}},
            ],
            "wires": [{"from": ["lamp", "out"], "to": ["sink", "in"]}],
        }
        flow_path = tmp_path / "custom.flow.json"
        flow_path.write_text(json.dumps(doc))
        code, _, _ = run_cli(capsys, "check", flow_path, "--specs", specs_dir)
        assert code == EXIT_OK
        code, _, _ = run_cli(capsys, "check", flow_path)
        assert code == EXIT_USAGE  # unknown spec without the directory


class TestJsonOutputsRoundTrip:
    def test_run_json_summary_parses(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", FIXTURES / "phone_chart.flow.json",
            "--seed", 2, "--duration", 2000, "--format", "json",
        )
        assert code == EXIT_OK
        data = json.loads(out)
        assert set(data) == {"seed", "duration", "records", "faults", "emitted", "outputs"}
        assert data["emitted"]["phone"] == 2

    def test_provenance_log_parses_through_runtime_parser(self, capsys, tmp_path):
        from flowkit.runtime import parse_log

        path = tmp_path / "log.jsonl"
        run_cli(
            capsys, "run", FIXTURES / "feed_merge.flow.json",
            "--seed", 1, "--duration", 15000, "--provenance", path,
        )
        records = parse_log(path.read_text())
        assert records
        assert {r.kind for r in records} <= {"emit", "consume", "fault"}


class TestServe:
    def test_port_in_use_is_internal_error(self, capsys):
        import socket

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.listen(1)
        try:
            code = main(["serve", "--port", str(port), "--ui", ""])
        finally:
            sock.close()
        assert code == EXIT_INTERNAL
