"""Tests for the command-line surface: exit codes and written files."""

import json

import pytest
from click.testing import CliRunner

from app import AppContext
from commands.protocol_cmd import bounds_report, run_protocol
from models import PolyhedronKind
from polytomo import cli


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def _run(*args):
        return runner.invoke(cli, ["--output-dir", str(tmp_path), *map(str, args)])

    return _run


def _json(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ── Protocols ────────────────────────────────────────────────

def test_protocol_report():
    report = run_protocol(AppContext(), PolyhedronKind.TETRAHEDRON, 1)
    assert report["complete"]
    assert report["q"] == 4
    assert report["unity_intensity"] == pytest.approx(2.0)
    assert report["adequacy"] == [
        {"r": 1, "dof": 1, "testable": True},
        {"r": 2, "dof": 0, "testable": False},
    ]


def test_protocol_command_exit_codes(run, tmp_path):
    assert run("protocol", "tetrahedron", 1).exit_code == 0
    assert run("protocol", "pyramid").exit_code == 2
    out = tmp_path / "tetra.json"
    assert run("protocol", "tetrahedron", "--out", out).exit_code == 0
    saved = _json(out)
    assert saved["qubits"] == 1
    assert len(saved["rows"]) == 4
    assert len(saved["rows"][0]) == 4


def test_bounds_report():
    report = bounds_report(2, 1)
    assert report["optimal_min"] == 3.0
    assert report["polyhedron_mixed_min"] == 24.75
    assert report["ratio"] == pytest.approx(8.25)


def test_bounds_command(run):
    assert run("bounds", 1, 2).exit_code == 0
    assert run("bounds", 1, 3).exit_code == 2
    assert run("bounds", 0, 1).exit_code == 2


# ── Data ─────────────────────────────────────────────────────

def test_simulate_then_reconstruct(run, tmp_path):
    counts = tmp_path / "counts.csv"
    truth = tmp_path / "truth.json"
    fit = tmp_path / "fit.json"
    result = run(
        "simulate", "tetrahedron", "--state-seed", 3, "--sample-size", 1e5,
        "--expected", "--out", counts, "--state-out", truth,
    )
    assert result.exit_code == 0
    lines = counts.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "row,count,time,lambda_hat"
    assert len(lines) == 5
    _, count, time, lam = map(float, lines[1].split(","))
    assert count == pytest.approx(lam * time, rel=1e-12)

    result = run("reconstruct", "tetrahedron", counts, "--rank", 1, "--truth", truth, "--out", fit)
    assert result.exit_code == 0
    report = _json(fit)
    assert report["r"] == 1
    assert report["converged"]
    assert report["fidelity_vs_truth"] > 1 - 1e-9


def test_reconstruct_selects_rank(run, tmp_path):
    counts = tmp_path / "counts.csv"
    fit = tmp_path / "fit.json"
    assert run("simulate", "cube", "--expected", "--out", counts).exit_code == 0
    assert run("reconstruct", "cube", counts, "--out", fit).exit_code == 0
    report = _json(fit)
    assert report["selected_rank"] == 1
    assert report["adequate"]
    assert report["candidates"][0]["adequacy"]["dof"] == 3
    assert [cand["r"] for cand in report["candidates"]] == [1, 2]
    assert report["candidates"][1]["adequacy"]["dof"] == 2


def test_reconstruct_with_saved_protocol(run, tmp_path):
    matrix = tmp_path / "cube.json"
    counts = tmp_path / "counts.csv"
    fit = tmp_path / "fit.json"
    assert run("protocol", "cube", "--out", matrix).exit_code == 0
    assert run("simulate", "cube", "--expected", "--out", counts).exit_code == 0
    result = run(
        "reconstruct", "tetrahedron", counts, "--rank", 1, "--protocol-file", matrix, "--out", fit
    )
    assert result.exit_code == 0
    assert _json(fit)["converged"]


def test_adequacy_command(run, tmp_path):
    counts = tmp_path / "counts.csv"
    assert run("simulate", "tetrahedron", "--sample-size", 1e4, "--out", counts).exit_code == 0
    assert run("adequacy", "tetrahedron", counts, "--rank", 1).exit_code == 0
    assert run("adequacy", "tetrahedron", counts, "--rank", 2).exit_code == 1
    assert run("adequacy", "tetrahedron", counts, "--alpha", 2.0).exit_code == 2


def test_reconstruct_rejects_mismatched_counts(run, tmp_path):
    counts = tmp_path / "counts.csv"
    assert run("simulate", "tetrahedron", "--out", counts).exit_code == 0
    assert run("reconstruct", "cube", counts, "--rank", 1).exit_code == 2


def test_simulate_is_seeded(run, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("--seed", 5, "simulate", "octahedron", "--out", a).exit_code == 0
    assert run("--seed", 5, "simulate", "octahedron", "--out", b).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


# ── Loss distribution ────────────────────────────────────────

def test_losscoef_white_noise(run, tmp_path):
    out = tmp_path / "d.csv"
    result = run("losscoef", "tetrahedron", "--state", "white-noise-mix", "--f", 1, "--out", out)
    assert result.exit_code == 0
    summary = _json(out.with_suffix(".json"))
    assert summary["L"] == pytest.approx(2.25)
    assert summary["j_max"] == 3
    assert len(out.read_text(encoding="utf-8").splitlines()) == 4


def test_losscoef_rank_too_small(run):
    result = run("losscoef", "cube", "--state", "white-noise-mix", "--f", 0.5, "--rank", 1)
    assert result.exit_code == 1


def test_mc_experiment(run, tmp_path, write_config):
    config = write_config(
        "tiny", polyhedron="dodecahedron", state={"kind": "pure-random", "seed": 7},
        rank=1, sample_size=1e4, runs=3, seed=1,
    )
    assert run("mc", config).exit_code == 0
    lines = (tmp_path / "mc_tiny.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "run,one_minus_f,z,chi2,chi2_p,converged"
    assert len(lines) == 4
    summary = _json(tmp_path / "mc_tiny.json")
    assert summary["runs"] == 3
    assert summary["failed"] == 0
    assert summary["theory"]["j_max"] == 2
    assert summary["distribution_test"] is not None
    assert summary["empirical"]["skewness"] is None


def test_mc_reports_shape_moments(run, tmp_path, write_config):
    config = write_config("shape", polyhedron="cube", sample_size=1e4, runs=8, seed=5)
    assert run("mc", config).exit_code == 0
    summary = _json(tmp_path / "mc_shape.json")
    empirical = summary["empirical"]
    assert isinstance(empirical["skewness"], float)
    assert isinstance(empirical["excess"], float)
    assert summary["theory"]["skewness"] > 0


def test_mc_overrides(run, tmp_path, write_config):
    config = write_config("tiny", polyhedron="tetrahedron", sample_size=1e4, runs=5, seed=2)
    assert run("mc", config, "--runs", 2).exit_code == 0
    assert _json(tmp_path / "mc_tiny.json")["runs"] == 2


def test_mc_theory_only(run, tmp_path, write_config):
    config = write_config(
        "noise", polyhedron="tetrahedron", state={"kind": "white-noise-mix", "f": 1.0},
        rank=2, theory_draws=100, seed=3,
    )
    assert run("mc", config, "--theory-only").exit_code == 0
    summary = _json(tmp_path / "mc_noise.json")
    assert summary["theory"]["L"] == pytest.approx(2.25)
    assert summary["draws"] == 100
    assert len((tmp_path / "mc_noise.csv").read_text(encoding="utf-8").splitlines()) == 101


def test_mc_unknown_config(run):
    assert run("mc", "no_such_experiment").exit_code == 2


def test_mc_list(run):
    result = run("mc", "--list")
    assert result.exit_code == 0
    assert "distribution_l4" in result.output


# ── Scan ─────────────────────────────────────────────────────

def test_scan_writes_grid_and_extremes(run, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("scan", "tetrahedron", "--resolution", 10, "--out", a).exit_code == 0
    assert run("scan", "tetrahedron", "--resolution", 10, "--out", b).exit_code == 0
    lines = a.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "theta_deg,phi_deg,L"
    assert len(lines) == 649
    assert a.read_bytes() == b.read_bytes()
    extremes = _json(tmp_path / "a.json")
    assert extremes["L_min"] == pytest.approx(1.0, abs=1e-5)
    assert extremes["L_max"] == pytest.approx(1.5, abs=1e-4)


def test_scan_resolution_out_of_range(run):
    assert run("scan", "cube", "--resolution", 20).exit_code == 2


def test_scan_multi_qubit_search(run, tmp_path):
    out = tmp_path / "ext.json"
    assert run("scan", "tetrahedron", "--qubits", 2, "--restarts", 2, "--out", out).exit_code == 0
    report = _json(out)
    assert report["qubits"] == 2
    assert report["L_min"] >= 3.0 - 1e-6
    assert report["L_max"] >= report["L_min"]
    assert len(report["argmin"]) == 4
