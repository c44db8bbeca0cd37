import json
import subprocess
import sys
from pathlib import Path

import pytest

from heteff.cli import main

GOLDEN = Path(__file__).parent / "data" / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_generate_analyze_validate_pipeline(tmp_path, capsys):
    trace = tmp_path / "t.json"
    code, _, _ = run(capsys, "generate", "--preset", "usecase1", "--out", str(trace))
    assert code == 0
    assert trace.read_bytes() == (GOLDEN / "usecase1.trace.json").read_bytes()

    code, out, err = run(capsys, "analyze", str(trace))
    assert code == 0
    assert out == (GOLDEN / "usecase1.report.txt").read_text()
    assert err == ""

    code, out, _ = run(capsys, "validate", str(trace))
    assert code == 0
    assert "0 error(s), 0 warning(s)" in out


def test_analyze_json_format_matches_golden(tmp_path, capsys):
    trace = tmp_path / "t.json"
    run(capsys, "generate", "--preset", "usecase1", "--out", str(trace))
    code, out, _ = run(capsys, "analyze", str(trace), "--format", "json")
    assert code == 0
    assert out.encode() == (GOLDEN / "usecase1.report.json").read_bytes()


def test_analyze_leaves_input_untouched(tmp_path, capsys):
    trace = tmp_path / "t.json"
    run(capsys, "generate", "--preset", "usecase2", "--out", str(trace))
    before = trace.read_bytes()
    run(capsys, "analyze", str(trace))
    assert trace.read_bytes() == before


def test_analyze_out_file(tmp_path, capsys):
    trace = tmp_path / "t.json"
    out_path = tmp_path / "report.txt"
    run(capsys, "generate", "--preset", "usecase1", "--out", str(trace))
    code, out, _ = run(capsys, "analyze", str(trace), "--out", str(out_path))
    assert code == 0
    assert out == ""
    assert out_path.read_text() == (GOLDEN / "usecase1.report.txt").read_text()


def test_missing_file_is_io_error(capsys):
    code, _, err = run(capsys, "analyze", "missing.json")
    assert code == 2
    assert "missing.json" in err


def test_corrupt_json_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 2
    assert "not valid JSON" in err


def test_overlapping_host_records_fail_validation(tmp_path, capsys):
    bad = tmp_path / "overlap.json"
    bad.write_text(json.dumps({
        "version": 1, "time_unit": "ns",
        "hosts": [{"rank": 0, "records": [
            {"state": "useful", "start": 0, "end": 10},
            {"state": "mpi", "start": 5, "end": 15},
        ]}],
        "devices": [],
    }))
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1
    assert "overlap" in out

    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 1
    assert "overlap" in err


def test_empty_trace_fails_analysis(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({
        "version": 1, "time_unit": "ns",
        "hosts": [{"rank": 0, "records": []}], "devices": [],
    }))
    code, _, err = run(capsys, "analyze", str(empty))
    assert code == 1
    assert "elapsed time is zero" in err


def test_usage_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--preset", "bogus", "--out", "x.json"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["analyze"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 3
    capsys.readouterr()


def test_generate_from_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "ranks": [
            [{"phase": "offload_kernel_sync", "duration": 10}],
            [{"phase": "offload_kernel_sync", "duration": 1}],
        ],
    }))
    out = tmp_path / "t.json"
    code, _, _ = run(capsys, "generate", "--spec", str(spec), "--scale", "2", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["devices"][0]["records"][0]["end"] == 20


def test_generate_bad_scenario_is_data_error(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "ranks": [[{"phase": "wait_device"}]],
    }))
    code, _, err = run(capsys, "generate", "--spec", str(spec), "--out", str(tmp_path / "t.json"))
    assert code == 1
    assert "no pending async" in err


def test_generate_malformed_spec_is_parse_error(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"ranks": [[{"phase": "nap"}]]}))
    code, _, err = run(capsys, "generate", "--spec", str(spec), "--out", str(tmp_path / "t.json"))
    assert code == 2
    assert "phase" in err


def test_import_pipeline(tmp_path, capsys):
    events = tmp_path / "events.json"
    events.write_text(json.dumps({"traceEvents": [
        {"name": "saxpy_kernel", "cat": "cuda", "ph": "X", "ts": 0, "dur": 50, "pid": 0, "tid": 1},
        {"name": "cudaMemcpy", "cat": "cuda", "ph": "X", "ts": 50, "dur": 10, "pid": 0, "tid": 1},
        {"name": "ignored", "cat": "other", "ph": "X", "ts": 0, "dur": 5, "pid": 0, "tid": 1},
    ]}))
    mapping = tmp_path / "map.json"
    mapping.write_text(json.dumps({
        "default_policy": "drop",
        "rules": [
            {"name_contains": "Memcpy", "target": "memory", "resource": "pid"},
            {"name_contains": "kernel", "target": "kernel", "resource": "pid"},
        ],
    }))
    out = tmp_path / "t.json"
    code, _, err = run(capsys, "import", str(events), "--map", str(mapping), "--out", str(out))
    assert code == 0
    assert "dropped unmapped event" in err
    payload = json.loads(out.read_text())
    kinds = [r["kind"] for r in payload["devices"][0]["records"]]
    assert kinds == ["kernel", "memory"]

    mapping.write_text(json.dumps({
        "default_policy": "error",
        "rules": [{"name_contains": "Memcpy", "target": "memory", "resource": "pid"}],
    }))
    code, _, err = run(capsys, "import", str(events), "--map", str(mapping), "--out", str(out))
    assert code == 1
    assert "matched no rule" in err


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "heteff.cli", "generate", "--preset", "usecase3", "--out", "-"],
        capture_output=True,
    )
    assert result.returncode == 0
    payload = json.loads(result.stdout)
    assert payload["version"] == 1
