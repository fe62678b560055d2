"""
Command-line surface: exit codes, byte-stable reports, fault injection,
and file round-trips.  Everything runs in-process through main(argv).
"""
from __future__ import annotations

import json

import numpy as np
import pytest

from grjkit.cli import main
from grjkit.models import jordan_model
from grjkit.pencil import ArPencil


@pytest.fixture()
def stable_model_path(tmp_path):
    path = tmp_path / "stable.json"
    ArPencil(1, 2, [np.diag([0.5, 0.25])]).save(path)
    return str(path)


@pytest.fixture()
def order3_model_path(tmp_path):
    ar, _ = jordan_model(1, blocks_at_one=[3])
    path = tmp_path / "order3.json"
    ar.save(path)
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_verdict(capsys):
    code, out, _ = run(capsys, ["analyze", "ex-c0", "--n", "8"])
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "pole order 2, I(1) fails, I(2) holds"
    assert report["pole_order"]["order"] == 2


def test_analyze_simple_pole(capsys):
    code, out, _ = run(capsys, ["analyze", "ex-evenodd"])
    assert code == 0
    report = json.loads(out)
    assert report["verdict"].startswith("pole order 1, I(1) holds")


def test_analyze_unknown_example(capsys):
    code, _, err = run(capsys, ["analyze", "ex-nonsense"])
    assert code == 1
    assert err


def test_unknown_flag_exits_one(capsys):
    code, _, _ = run(capsys, ["analyze", "ex-c0", "--frobnicate"])
    assert code == 1


def test_no_unit_root_exit_two(capsys, stable_model_path):
    code, _, err = run(capsys, ["analyze", "--model", stable_model_path])
    assert code == 2
    assert "unit root" in err.lower()


def test_malformed_model_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 1, "dim": 2}')
    code, _, _ = run(capsys, ["analyze", "--model", str(bad)])
    assert code == 1


def test_represent_neither_class_exit_three(capsys, order3_model_path):
    code, _, err = run(capsys, ["represent", "--model", order3_model_path])
    assert code == 3
    assert err


def test_represent_i1_payload(capsys):
    code, out, _ = run(capsys, ["represent", "ex-evenodd"])
    assert code == 0
    report = json.loads(out)
    assert report["class"] == "I1"
    assert "long_run" in report and "bn" in report
    assert report["cross_check_residual"] < 1e-6


def test_represent_i2_payload(capsys):
    code, out, _ = run(capsys, ["represent", "ex-c0", "--n", "8"])
    assert code == 0
    report = json.loads(out)
    assert report["class"] == "I2"
    assert "long_run2" in report and "tier1_annihilators" in report
    assert report["cross_check_residual"] < 1e-6


def test_reports_are_byte_identical(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", "ex-c0", "--n", "8", "--out", str(first)]) == 0
    assert main(["analyze", "ex-c0", "--n", "8", "--out", str(second)]) == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()


def test_simulate_csv_deterministic(capsys, tmp_path):
    argv = ["simulate", "ex-c0", "--n", "8", "--horizon", "40", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    capsys.readouterr()
    content = a.read_bytes()
    assert content == b.read_bytes()
    assert content.startswith(b"t,coord_0")


def test_simulate_different_seeds_differ(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "ex-c0", "--horizon", "20", "--seed", "1", "--out", str(a)])
    main(["simulate", "ex-c0", "--horizon", "20", "--seed", "2", "--out", str(b)])
    capsys.readouterr()
    assert a.read_bytes() != b.read_bytes()


def test_sweep_volterra(capsys):
    code, out, _ = run(capsys, ["sweep", "ex-volterra", "--dims", "4,8"])
    assert code == 0
    report = json.loads(out)["sweep"]
    orders = {point["n"]: point["order"] for point in report["points"]}
    assert orders == {4: 4, 8: 8}
    assert report["essential_flag"] is True


def test_examples_listing(capsys):
    code, out, _ = run(capsys, ["examples"])
    assert code == 0
    listing = json.loads(out)
    names = {entry["name"] for entry in listing["examples"]}
    assert {"ex-c0", "ex-volterra", "ex-selfadjoint", "ex-evenodd",
            "ex-jordan"} <= names


def test_verify_all_invariants(capsys):
    code, out, _ = run(capsys, ["verify", "ex-evenodd", "--horizon", "60",
                                "--jmax", "30"])
    assert code == 0
    report = json.loads(out)
    assert report["ok"] and not report["failed"]
    names = [item["name"] for item in report["invariants"]]
    assert "determinism" in names and "representation" in names


def test_verify_fault_injection_names_the_invariant(capsys, monkeypatch):
    monkeypatch.setenv("GRJ_INJECT_FAULT", "h")
    code, out, err = run(capsys, ["verify", "ex-c0", "--n", "8",
                                  "--horizon", "60", "--jmax", "30"])
    assert code == 4
    assert "h-coefficient cross-check" in err
    report = json.loads(out)
    assert "h-coefficient cross-check" in report["failed"]


def test_verify_path_mismatch_fails_determinism(capsys, tmp_path):
    stored = tmp_path / "path.csv"
    assert main(["simulate", "ex-c0", "--n", "8", "--horizon", "50",
                 "--seed", "3", "--out", str(stored)]) == 0
    capsys.readouterr()
    code, out, err = run(capsys, ["verify", "ex-c0", "--n", "8", "--horizon",
                                  "50", "--seed", "4", "--path", str(stored),
                                  "--jmax", "30"])
    assert code == 4
    assert "determinism" in err


def test_verify_path_match_passes(capsys, tmp_path):
    stored = tmp_path / "path.csv"
    assert main(["simulate", "ex-c0", "--n", "8", "--horizon", "50",
                 "--seed", "3", "--out", str(stored)]) == 0
    capsys.readouterr()
    code, _, _ = run(capsys, ["verify", "ex-c0", "--n", "8", "--horizon", "50",
                              "--seed", "3", "--path", str(stored),
                              "--jmax", "30"])
    assert code == 0


def test_verify_two_lag_model(capsys, tmp_path):
    # a p = 2 model keeps the observable block strictly smaller than the
    # companion space, which the h cross-check has to compress correctly
    from grjkit.models import ar2_unit_root_model
    path = tmp_path / "ar2.json"
    ar2_unit_root_model(seed=11).save(path)
    code, out, err = run(capsys, ["verify", "--model", str(path),
                                  "--horizon", "60", "--jmax", "30"])
    assert code == 0, err
    report = json.loads(out)
    assert report["ok"]


def test_bad_default_tol_env(capsys, monkeypatch):
    monkeypatch.setenv("GRJ_DEFAULT_TOL", "not-a-number")
    code, _, err = run(capsys, ["analyze", "ex-c0"])
    assert code == 1
    assert err


def test_model_file_round_trip(capsys, tmp_path):
    from grjkit.models import build_example
    ar, _ = build_example("ex-c0", n=8)
    path = tmp_path / "shift.json"
    ar.save(path)
    code, out, _ = run(capsys, ["analyze", "--model", str(path)])
    assert code == 0
    assert json.loads(out)["verdict"] == "pole order 2, I(1) fails, I(2) holds"
