import json

import pytest

from cvkerr import cli
from cvkerr.errors import InvalidArgument
from cvkerr.harness import (ExperimentConfig, error_from_csv, list_experiments,
                            operator_replacement_error, run_experiment)
from cvkerr.states import FockState


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name, _ in list_experiments():
        assert name in out


def test_run_pass_exit_code(tmp_path, capsys):
    assert cli.main(["run", "-e", "fig1", "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]
    assert {"report.json", "state.csv"} <= {p.name for p in tmp_path.iterdir()}


def test_run_tolerance_exit_code(capsys):
    # a strong Kerr amplitude lies far from the weak-Kerr reference
    assert cli.main(["run", "-e", "fig1", "--t", "0.3"]) == 2


def test_run_error_exit_codes(capsys):
    assert cli.main(["run", "-e", "nonsense"]) == 1
    assert cli.main(["run"]) == 1
    assert cli.main(["run", "-e", "fig1", "--t", "-1"]) == 1
    assert "error" in capsys.readouterr().err


def test_config_file_and_flag_priority(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "single_photon", "t": 0.3}))
    assert cli.main(["run", "--config", str(cfg), "--t", "1e-3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["experiment"] == "single_photon"
    assert report["config"]["t"] == 1e-3


def test_missing_config_file(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "absent.json")]) == 1


def test_report_reproducible():
    a = run_experiment(ExperimentConfig("teleport_equiv", mode="deterministic", seed=3))
    b = run_experiment(ExperimentConfig("teleport_equiv", mode="deterministic", seed=3))
    assert a.to_json(include_runtime=False) == b.to_json(include_runtime=False)
    assert a.passed


def test_csv_error_matches_report(tmp_path):
    rep = run_experiment(ExperimentConfig("fig1", out=str(tmp_path)))
    assert abs(error_from_csv(tmp_path / "state.csv") - rep.error) <= 1e-6 + 1e-3 * rep.error


def test_protocol_mode_writes_transcript(tmp_path):
    rep = run_experiment(ExperimentConfig("fig1", mode="postselect", out=str(tmp_path)))
    assert "transcript.json" in rep.files
    tr = json.loads((tmp_path / "transcript.json").read_text())
    assert tr["mode"] == "postselect"
    assert rep.passed


def test_config_validation():
    with pytest.raises(InvalidArgument):
        ExperimentConfig("fig1", n_points=100)
    with pytest.raises(InvalidArgument):
        ExperimentConfig("fig1", scheme="fifth")
    with pytest.raises(InvalidArgument):
        ExperimentConfig("fig1", reps=0)


def test_config_round_trip():
    cfg = ExperimentConfig("ns_gate", fock_coeffs=(1, 1j), reps=3)
    back = ExperimentConfig.from_dict(cfg.to_dict())
    assert back.fock_coeffs == cfg.fock_coeffs and back.reps == 3


def test_fig2_larger_than_fig1():
    rep = run_experiment(ExperimentConfig("fig2"))
    assert rep.passed
    assert rep.diagnostics["fig1_error"] * 100 < rep.error


def test_operator_replacement_small_t_limit():
    st = FockState.coherent(1.0, 60)
    assert operator_replacement_error(1e-5, st) < operator_replacement_error(1e-3, st)


def test_appendix_experiment():
    rep = run_experiment(ExperimentConfig("appendix"))
    assert rep.passed and rep.diagnostics["dim"] == 30
