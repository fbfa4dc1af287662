from __future__ import annotations

import json
import subprocess
import sys

import pytest

from roundelim.lab import SUITES, ExperimentConfig, emit_report, run_suite
from roundelim.lab.cli import main
from roundelim.lab.suites import num, read_records


def test_suite_names():
    assert set(SUITES) == {"info-identities", "average-encoding", "local-transition", "classical-roundelim",
                           "quantum-roundelim", "reductions", "cellprobe-compile", "bound-tracers", "gt-protocol"}


def test_record_schema_and_determinism(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    recs = run_suite(ExperimentConfig("info-identities", seed=3, out=str(a), trials=12))
    run_suite(ExperimentConfig("info-identities", seed=3, out=str(b), trials=12))
    assert a.read_bytes() == b.read_bytes()
    assert len(recs) == 12 and all(r["pass"] for r in recs)
    first = json.loads(a.read_text().splitlines()[0])
    assert {"suite", "case", "digest", "measured", "bound", "slack", "residual", "pass"} <= first.keys()
    assert "wall_time" not in first
    c = tmp_path / "c.jsonl"
    run_suite(ExperimentConfig("info-identities", seed=4, out=str(c), trials=12))
    assert c.read_bytes() != a.read_bytes()


def test_rerun_overwrites(tmp_path):
    out = tmp_path / "r.jsonl"
    run_suite(ExperimentConfig("bound-tracers", out=str(out)))
    size = out.stat().st_size
    run_suite(ExperimentConfig("bound-tracers", out=str(out)))
    assert out.stat().st_size == size


def test_timings_flag(tmp_path):
    recs = run_suite(ExperimentConfig("bound-tracers", timings=True))
    assert all("wall_time" in r for r in recs)


def test_unknown_suite_and_bad_path(tmp_path):
    out = tmp_path / "x.jsonl"
    with pytest.raises(KeyError):
        run_suite(ExperimentConfig("nope", out=str(out)))
    assert not out.exists()
    with pytest.raises(OSError):
        run_suite(ExperimentConfig("bound-tracers", out=str(tmp_path / "missing" / "x.jsonl")))


def test_num_formatting():
    from fractions import Fraction
    assert num(Fraction(1, 3)) == "1/3"
    assert num(1 / 3) == 0.333333333333
    assert num({"a": [Fraction(1, 2)]}) == {"a": ["1/2"]}


def write_records(path, recs):
    path.write_text("".join(json.dumps(r) + "\n" for r in recs))


def test_report_counts(tmp_path):
    inp = tmp_path / "in.jsonl"
    write_records(inp, [
        {"suite": "s", "case": 0, "pass": True, "slack": 0.5, "residual": 1e-12},
        {"suite": "s", "case": 1, "pass": False, "slack": "-1/4", "residual": None},
        {"suite": "t", "case": 0, "pass": True, "slack": None},
    ])
    lines = emit_report(str(inp)).splitlines()
    assert lines[0] == "suite,cases,failures,min_slack,max_residual"
    assert lines[1] == "s,2,1,-0.25,1e-12"
    assert lines[2] == "t,1,0,,"


def test_report_empty_and_malformed(tmp_path):
    empty = tmp_path / "e.jsonl"
    empty.write_text("")
    assert emit_report(str(empty)) == "suite,cases,failures,min_slack,max_residual\n"
    bad = tmp_path / "b.jsonl"
    bad.write_text('{"suite": "s", "pass": true}\n{oops\n')
    with pytest.raises(ValueError, match="line 2"):
        read_records(str(bad))


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "o.jsonl"
    assert main(["run", "--suite", "bound-tracers", "--out", str(out)]) == 0
    assert main(["run", "--suite", "nope", "--out", str(out)]) == 2
    assert main(["run", "--suite", "bound-tracers", "--out", str(tmp_path / "no" / "o.jsonl")]) == 2
    write_records(tmp_path / "f.jsonl", [{"suite": "s", "pass": False}])
    assert main(["report", "--in", str(tmp_path / "f.jsonl"), "--out", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().splitlines()[1] == "s,1,1,,"
    assert main(["report", "--in", str(tmp_path / "missing.jsonl")]) == 2


def test_cli_trace(tmp_path, capsys):
    csv_path = tmp_path / "gt.csv"
    from roundelim.problems import gt_threshold
    n = gt_threshold((1, 1))
    assert main(["trace", "gt", "--n", str(n), "--l", "1,1", "--out", str(csv_path)]) == 0
    assert csv_path.read_text().splitlines()[-1].split(",")[3] == "1/2"
    assert main(["trace", "gt", "--n", str(n - 1), "--l", "1,1"]) == 1
    assert main(["trace", "pred", "--m-exp", "1158131"]) == 0
    assert main(["trace", "pred", "--m-exp", "16", "--t", "3"]) == 1
    assert main(["trace", "pred", "--m-exp", "16"]) == 2


def test_env_caps(monkeypatch):
    monkeypatch.setenv("LAB_CAP_QUBITS", "9")
    monkeypatch.setenv("LAB_CAP_BRANCHES", "1000")
    cfg = ExperimentConfig.from_env("quantum-roundelim")
    assert (cfg.cap_qubits, cfg.cap_branches) == (9, 1000)
    assert ExperimentConfig.from_env("quantum-roundelim", cap_qubits=11).cap_qubits == 11
    recs = run_suite(ExperimentConfig.from_env("quantum-roundelim", trials=3))
    assert all(r["pass"] for r in recs)


def test_console_script(tmp_path):
    out = tmp_path / "o.jsonl"
    res = subprocess.run([sys.executable, "-m", "roundelim.lab.cli", "run", "--suite", "bound-tracers",
                          "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0 and "0 failures" in res.stderr
