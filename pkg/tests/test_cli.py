import csv
import json
import math

import pytest

from tline.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from tline.scenario import data_dir

FAST = ["--n-elements", "20", "--workers", "1"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _numeric_ok(path):
    for row in _rows(path):
        for k, v in row.items():
            if k != "method":
                assert math.isfinite(float(v)), (path, k, v)


def test_simulate_outputs(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--scenario", "texas", "--steps", "1000", "--out", str(out)] + FAST) == EXIT_OK
    rows = _rows(out / "timeseries.csv")
    assert len(rows) == 1000 and list(rows[0]) == ["t", "phi_max", "fatigue_max", "theta_max",
                                                    "voltage_drop", "tension"]
    _numeric_ok(out / "timeseries.csv")
    snaps = sorted(p.name for p in (out / "snapshots").iterdir())
    assert snaps == ["snapshot_005y.csv", "snapshot_010y.csv"]
    assert len(_rows(out / "snapshots" / "snapshot_005y.csv")) == 21
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "survived"
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "simulate" and man["seed"] == 20240611 and "started" in man
    assert man["argv"] == ["simulate", "--scenario", "texas", "--steps", "1000", "--out", str(out)] + FAST


def test_simulate_immediate_failure(tmp_path):
    out = tmp_path / "f"
    assert main(["simulate", "--scenario", "texas", "--theta-lim", "0", "--out", str(out)] + FAST) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["failure_step"] == 1 and summary["status"] == "failed"


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["simulate", "--scenario", str(tmp_path / "none.yaml")] + FAST) == EXIT_CONFIG
    bad = tmp_path / "s.yaml"
    bad.write_text(f"include: {data_dir() / 'table3.yaml'}\nweather: missing.csv\n")
    assert main(["simulate", "--scenario", str(bad)] + FAST) == EXIT_CONFIG
    assert main(["uq", "--scenario", "texas", "--params", "nope"] + FAST) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_solver_error_exit_3_flushes_partial(tmp_path):
    sc = tmp_path / "taut.yaml"
    sc.write_text(f"include: {data_dir() / 'texas.yaml'}\nsag:\n  alpha_l: -0.05\n")
    out = tmp_path / "o"
    assert main(["simulate", "--scenario", str(sc), "--out", str(out)] + FAST) == EXIT_SOLVER
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "solver_error" and summary["completed_steps"] == 2
    assert len(_rows(out / "timeseries.csv")) == 2


def test_env_override_reaches_cli(tmp_path, monkeypatch):
    monkeypatch.setenv("TLINE_DAMAGE", "severe")
    out = tmp_path / "e"
    assert main(["simulate", "--scenario", "texas", "--steps", "10", "--out", str(out)] + FAST) == EXIT_OK
    assert json.loads((out / "summary.json").read_text())["a_sigma"] == 1.7


def _uq(out, workers):
    return main(["uq", "--scenario", "texas", "--params", "I_b,g_c", "--points", "2", "--steps", "80",
                 "--n-elements", "20", "--workers", str(workers), "--out", str(out)])


def test_uq_outputs_and_determinism(tmp_path):
    assert _uq(tmp_path / "a", 1) == EXIT_OK
    assert _uq(tmp_path / "b", 2) == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["campaign.json", "manifest.json", "mean.csv", "sobol.csv", "std.csv"]
    for n in names:
        if n != "manifest.json":
            assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    assert list(_rows(tmp_path / "a" / "sobol.csv")[0]) == ["t", "S_I_b", "S_g_c", "low_variance"]
    for n in ("mean.csv", "std.csv", "sobol.csv"):
        _numeric_ok(tmp_path / "a" / n)


def test_pf_outputs(tmp_path):
    out = tmp_path / "pf"
    args = ["pf", "--scenario", "texas", "--scenario", "california", "--damage", "severe", "--damage", "minimal",
            "--params", "I_b", "--points", "2", "--steps", "50", "--theta-lim", "305", "--out", str(out)] + FAST
    assert main(args) == EXIT_OK
    combined = _rows(out / "pf_combined.csv")
    assert list(combined[0]) == ["t", "texas_severe", "texas_minimal", "california_severe", "california_minimal"]
    for key in ("texas_severe", "california_minimal"):
        rows = _rows(out / f"pf_{key}.csv")
        pf = [float(r["p_f"]) for r in rows]
        assert all(0 <= p <= 1 for p in pf) and pf == sorted(pf)


def test_pf_huge_limit_gives_zero(tmp_path):
    out = tmp_path / "z"
    args = ["pf", "--scenario", "texas", "--damage", "severe", "--params", "I_b", "--points", "2",
            "--steps", "30", "--theta-lim", "1e9", "--out", str(out)] + FAST
    assert main(args) == EXIT_OK
    assert all(float(r["p_f"]) == 0.0 for r in _rows(out / "pf_texas_severe.csv"))


def test_convergence_outputs(tmp_path):
    out = tmp_path / "c"
    args = ["convergence", "--scenario", "texas", "--step", "10", "--reference-points", "12",
            "--out", str(out)] + FAST
    assert main(args) == EXIT_OK
    rows = _rows(out / "convergence.csv")
    assert [r["method"] for r in rows] == ["pcm"] * 9 + ["mc"] * 3
    assert [int(r["size"]) for r in rows[-3:]] == [100, 1000, 10000]
    _numeric_ok(out / "convergence.csv")


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "simulate" in capsys.readouterr().out
