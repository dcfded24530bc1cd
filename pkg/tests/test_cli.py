"""End-to-end command line checks via subprocess."""

import json
import os
import subprocess
import sys

import pytest


def run_cli(*argv, cwd, env_extra=None):
    env = dict(os.environ)
    env.pop("MINVEC_OUT_DIR", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "minvec", *argv],
                          capture_output=True, text=True, cwd=cwd, env=env)


def write_scenario(path, body):
    path.write_text(json.dumps(body))
    return str(path)


@pytest.fixture()
def volterra_scenario(tmp_path):
    return write_scenario(tmp_path / "s.json", {
        "name": "cli-volterra",
        "operator": {"gallery": "volterra", "size": 8},
        "powers": 4,
    })


@pytest.fixture()
def identity_scenario(tmp_path):
    # an isometry: every d_n ratio is 1, so the plan check fails
    return write_scenario(tmp_path / "flat.json", {
        "name": "cli-identity",
        "operator": {"gallery": "weighted_shift", "size": 6,
                     "weights": [0, 0, 0, 0, 0], "eta": 1.0},
        "powers": 3,
    })


def test_solve_writes_report_and_trace(volterra_scenario, tmp_path):
    proc = run_cli("solve", "--scenario", volterra_scenario, cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "trace.csv").exists()
    assert not (tmp_path / "basis.csv").exists()
    assert "n=1: d=" in proc.stdout
    assert "checks passed" in proc.stdout


def test_subspace_adds_basis_and_plot(volterra_scenario, tmp_path):
    proc = run_cli("subspace", "--scenario", volterra_scenario,
                   "--emit-plot", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "basis.csv").exists()
    assert (tmp_path / "plots.svg").exists()
    assert "subspace: dim=" in proc.stdout
    assert "plan: powers" in proc.stdout


def test_missing_scenario_file_exits_2(tmp_path):
    proc = run_cli("solve", "--scenario", str(tmp_path / "nope.json"),
                   cwd=tmp_path)
    assert proc.returncode == 2
    assert proc.stderr.startswith("minvec:")


def test_malformed_scenario_exits_2(tmp_path):
    path = write_scenario(tmp_path / "bad.json", {
        "operator": {"gallery": "volterra", "size": 8}, "bogus_key": 1})
    proc = run_cli("solve", "--scenario", path, cwd=tmp_path)
    assert proc.returncode == 2
    assert "unknown keys" in proc.stderr


def test_solver_failure_exits_3_and_names_the_stage(tmp_path):
    # a center annihilated by the adjoint makes the limit stage collapse
    path = write_scenario(tmp_path / "hard.json", {
        "operator": {"gallery": "volterra", "size": 16},
        "x0": {"vector": [0.0] * 15 + [1.0]},
    })
    proc = run_cli("subspace", "--scenario", path, cwd=tmp_path)
    assert proc.returncode == 3
    assert "stage limits" in proc.stderr


def test_strict_mode_exits_4_on_findings(identity_scenario, tmp_path):
    relaxed = run_cli("trace", "--scenario", identity_scenario, cwd=tmp_path)
    assert relaxed.returncode == 0
    assert "subsequence plan decays" in relaxed.stdout
    strict = run_cli("trace", "--scenario", identity_scenario, "--strict",
                     cwd=tmp_path)
    assert strict.returncode == 4


def test_verify_round_trip(volterra_scenario, tmp_path):
    assert run_cli("subspace", "--scenario", volterra_scenario,
                   cwd=tmp_path).returncode == 0
    fresh = run_cli("verify", cwd=tmp_path)
    assert fresh.returncode == 0
    assert "re-verified" in fresh.stdout

    doc = json.loads((tmp_path / "report.json").read_text())
    doc["alpha"][0]["records"][0]["alpha"] *= 1.25
    (tmp_path / "report.json").write_text(json.dumps(doc))
    tampered = run_cli("verify", cwd=tmp_path)
    assert tampered.returncode == 4
    assert "alpha record" in tampered.stdout


def test_out_flag_beats_scenario_out_dir(tmp_path):
    scendir = tmp_path / "from-scenario"
    flagdir = tmp_path / "from-flag"
    path = write_scenario(tmp_path / "s.json", {
        "operator": {"gallery": "volterra", "size": 8},
        "powers": 3,
        "out_dir": str(scendir),
    })
    proc = run_cli("solve", "--scenario", path, "--out", str(flagdir),
                   cwd=tmp_path)
    assert proc.returncode == 0
    assert (flagdir / "report.json").exists()
    assert not scendir.exists()


def test_env_out_dir_is_the_fallback(volterra_scenario, tmp_path):
    envdir = tmp_path / "from-env"
    proc = run_cli("solve", "--scenario", volterra_scenario, cwd=tmp_path,
                   env_extra={"MINVEC_OUT_DIR": str(envdir)})
    assert proc.returncode == 0
    assert (envdir / "report.json").exists()


def test_seed_flag_overrides_the_scenario(volterra_scenario, tmp_path):
    proc = run_cli("solve", "--scenario", volterra_scenario, "--seed", "7",
                   cwd=tmp_path)
    assert proc.returncode == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["scenario"]["seed"] == 7


def test_gallery_verb_dumps_the_operator(volterra_scenario, tmp_path):
    proc = run_cli("gallery", "--scenario", volterra_scenario, cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "operator.csv").exists()
    assert "volterra(8)" in proc.stdout
    assert "injective: True" in proc.stdout
