"""Smoke tests for the python module and the CLI it wraps."""

import math
import os
import subprocess

import pytest

import qmem

CONFIG = """\
[experiment]
kind = "path"
pairs = "5-6"
states = "0,X"

[sampling]
cycles = 2000

[analysis]
windows_ns = [270]
n_mc = 100
"""


def test_bound_anchor_roundtrip():
    p = qmem.solve_p_succ(0.858, 1.10)
    assert 1e-4 < p < 0.1
    assert math.isclose(qmem.classical_bound(1.10, p), 0.858, abs_tol=1e-6)
    assert math.isclose(qmem.fock_fidelity(1), 2.0 / 3.0, rel_tol=1e-12)


def test_bound_rejects_infeasible_target():
    with pytest.raises(RuntimeError):
        qmem.solve_p_succ(0.999, 1.10)


def test_fidelity_from_exact_counts():
    # |X> counts: equal poles, all plus-x, balanced y.
    counts = [500.0, 500.0, 1000.0, 0.0, 500.0, 500.0]
    assert qmem.fidelity_from_counts(counts, "X") == pytest.approx(1.0, abs=1e-9)
    assert qmem.fidelity_from_counts(counts, "-X") == pytest.approx(0.0, abs=1e-9)


def test_mc_fidelity_is_deterministic():
    counts = [500.0, 500.0, 950.0, 50.0, 500.0, 500.0]
    a = qmem.mc_fidelity(counts, "X", n_mc=200, seed=7)
    b = qmem.mc_fidelity(counts, "X", n_mc=200, seed=7)
    assert a == b
    assert a["err_plus"] > 0.0 and a["err_minus"] > 0.0


def test_fringe_fit_matches_closed_form():
    s, b = 6e-4, 4e-5
    phases = [-math.pi + 3.0 * math.pi * k / 12.0 for k in range(13)]
    counts = [0.5 * s * (1.0 + math.cos(p)) + b for p in phases]
    fit = qmem.fit_fringe(phases, counts)
    assert fit["visibility"] == pytest.approx(qmem.closed_form_visibility(s, b), abs=1e-9)


def test_simulate_analyze_pipeline(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(CONFIG)
    run_dir = tmp_path / "run"
    out_dir = tmp_path / "out"

    sim = qmem.simulate(str(cfg), str(run_dir))
    assert os.path.exists(sim["manifest"])
    assert len(sim["files"]) == 12  # 2 states x 6 settings

    res = qmem.analyze(str(cfg), str(run_dir), str(out_dir))
    assert res["headline_window_ns"] == 270.0
    assert len(res["fidelities"]) == 2
    for f in res["fidelities"]:
        assert 0.0 <= f["fidelity"] <= 1.0
    assert (out_dir / "fidelities.csv").exists()

    with pytest.raises(ValueError):
        qmem.analyze(str(cfg), str(tmp_path / "missing"), "")


def test_cli_runs_the_same_pipeline(tmp_path):
    cli = os.environ.get("QMEM_CLI")
    if not cli:
        pytest.skip("QMEM_CLI not set")
    cfg = tmp_path / "run.toml"
    cfg.write_text(CONFIG)
    run_dir = tmp_path / "cli_run"

    done = subprocess.run(
        [cli, "simulate", "--config", str(cfg), "--out", str(run_dir)],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 0, done.stderr
    assert (run_dir / "manifest.json").exists()

    bad = subprocess.run(
        [cli, "simulate", "--config", str(tmp_path / "nope.toml"), "--out", str(run_dir)],
        capture_output=True,
        text=True,
    )
    assert bad.returncode == 1
