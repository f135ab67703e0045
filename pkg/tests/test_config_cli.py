import csv
import json
from pathlib import Path

import numpy as np
import pytest

from sizepop.cli import main
from sizepop.config import load_config, parse_config, serialize_config
from sizepop.discretization import build_grid
from sizepop.errors import AdmissibilityError, IoError, ParseError
from sizepop.evolution import simulate
from sizepop.outputs import write_outputs
from sizepop.samples import pure_death

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.yaml"))

MINIMAL = """\
model:
  m: 1
  mu: 0
  gamma: 0
  d: 1
  beta: 0
  boundary: conservative
"""


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    bc = cfg.model.bc
    assert (bc.b0, bc.bm, bc.c0, bc.cm) == (1.0, 1.0, 0.0, 0.0)
    assert cfg.N == 64 and cfg.run.scheme == "implicit_euler"
    np.testing.assert_array_equal(cfg.initial_state(), np.ones(65))


def test_negative_mortality_rejected():
    with pytest.raises(AdmissibilityError, match="mortality must be nonnegative"):
        parse_config(MINIMAL.replace("mu: 0", "mu: -0.1"))


def test_constant_growth_not_conservative():
    with pytest.raises(AdmissibilityError, match="cm"):
        parse_config(MINIMAL.replace("gamma: 0", "gamma: 0.5"))


def test_unknown_key_located():
    text = MINIMAL + "grid: {N: 8, spacing: 2}\n"
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert exc.value.line == 8
    assert "spacing" in str(exc.value)


@pytest.mark.parametrize(
    "text",
    [
        "model: [1, 2]\n",
        "model:\n  m: 1\n  mu: {cubic: 1}\n  gamma: 0\n  d: 1\n  beta: 0\n  boundary: conservative\n",
        MINIMAL + "run: {dt: -1}\n",
        MINIMAL + "run: {scheme: rk4}\n",
        "model: {m: 1\n",
        "",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_config(text)


def test_numeric_strings_accepted():
    cfg = parse_config(MINIMAL + "run: {dt: 1e-3, T: 2}\n")
    assert cfg.run.dt == 1e-3 and cfg.run.T == 2.0


def test_explicit_boundary():
    cfg = parse_config(MINIMAL.replace("boundary: conservative", "boundary: {b0: 1.5, bm: 1.0, c0: 0.1, cm: 0}"))
    assert (cfg.model.bc.b0, cfg.model.bc.c0) == (1.5, 0.1)
    assert not cfg.model.bc.conservative


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_round_trip(path):
    cfg = load_config(path)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_round_trip_all_initial_kinds():
    for init in ("{constant: 2.5}", "{gaussian: {center: 0.3, width: 0.1, amplitude: 2}}",
                 "{table: [[0, 1], [1, 0]]}"):
        cfg = parse_config(MINIMAL + f"initial: {init}\n")
        assert parse_config(serialize_config(cfg)) == cfg


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "nope.yaml")


# -- outputs -----------------------------------------------------------------


def test_timeseries_row_count(tmp_path):
    grid = build_grid(1.0, 10)
    traj = simulate(pure_death(), grid, np.ones(11), 0.01, 1.0, snapshot_stride=25)
    write_outputs(tmp_path, grid, traj=traj, seed=3)
    rows = _read_csv(tmp_path / "timeseries.csv")
    assert rows[0] == ["t", "total_mass", "u_boundary_0", "u_boundary_m"]
    assert len(rows) - 1 == 100 + 1
    assert float(rows[-1][1]) == traj.masses[-1]
    prof = _read_csv(tmp_path / "profile.csv")
    assert prof[0] == ["s", "u"] and len(prof) == 12
    assert (tmp_path / "timeseries.csv").read_text().endswith("\n")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) >= {"malthus", "residual", "irreducible", "conservation_drift", "positivity_min",
                            "dissipativity_max_ratio", "config", "seed"}
    assert summary["seed"] == 3


def test_seventeen_digits(tmp_path):
    grid = build_grid(1.0, 2)
    traj = simulate(pure_death(), grid, np.full(3, 1 / 3), 0.1, 0.1)
    write_outputs(tmp_path, grid, traj=traj)
    value = _read_csv(tmp_path / "timeseries.csv")[1][2]
    assert float(value) == 1 / 3 and value == f"{1 / 3:.17g}"


def test_write_outputs_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoError) as exc:
        write_outputs(blocker / "sub", build_grid(1.0, 2))
    assert exc.value.path is not None


# -- command line ------------------------------------------------------------


def _write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_simulate_conservative(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL.replace("gamma: 0", "gamma: {polynomial: [0.5, -0.5]}").replace("d: 1", "d: 0.2")
                 + "grid: {N: 40}\nrun: {dt: 0.01, T: 5, snapshot_stride: 100}\n"
                 + "initial: {gaussian: {center: 0.3, width: 0.1, amplitude: 1}}\n")
    out = tmp_path / "out"
    assert main(["simulate", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["conservation_drift"] <= 1e-10
    assert len(_read_csv(out / "timeseries.csv")) == 502


def test_cli_spectrum_only(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL.replace("mu: 0", "mu: 0.3") + "grid: {N: 16}\n")
    out = tmp_path / "out"
    assert main(["spectrum", cfg, "--out", str(out), "--tol", "1e-12", "--max-iter", "500"]) == 0
    assert not (out / "timeseries.csv").exists()
    prof = _read_csv(out / "profile.csv")
    assert prof[0] == ["s", "eigenprofile"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["malthus"] == pytest.approx(-0.3, abs=1e-8)
    assert summary["irreducible"] is True
    assert "malthus" in capsys.readouterr().out


def test_cli_aeg(tmp_path):
    out = tmp_path / "out"
    ref = [p for p in CONFIGS if p.stem == "reference"][0]
    assert main(["aeg", str(ref), "--out", str(out)]) == 0
    rows = _read_csv(out / "aeg.csv")
    assert rows[0] == ["t", "distance"]
    assert float(rows[-1][1]) < float(rows[1][1])


def test_cli_check_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, MINIMAL.replace("mu: 0", "mu: 0.1") + "grid: {N: 16}\nrun: {dt: 0.01, T: 1}\n")
    assert main(["check", good, "--samples", "10", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 4 and "ALL PASS" in out
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["dissipativity_max_ratio"] <= 1 + 1e-10

    # omega below omega_min on a model with inflow at the left boundary fails dissipativity
    noncons = [p for p in CONFIGS if p.stem == "noncons"][0]
    assert main(["check", str(noncons), "--samples", "50", "--omega", "0"]) == 1
    assert "FAIL dissipativity" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    assert main(["check", str(tmp_path / "missing.yaml")]) == 2
    bad = _write(tmp_path, MINIMAL.replace("mu: 0", "mu: -0.1"))
    assert main(["simulate", bad]) == 2
    assert "mortality must be nonnegative" in capsys.readouterr().err
    bad = _write(tmp_path, MINIMAL + "extra: 1\n", "bad2.yaml")
    assert main(["spectrum", bad]) == 2


def test_cli_runtime_error_exit_one(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path, MINIMAL + "grid: {N: 4}\nrun: {dt: 0.1, T: 0.2}\n")
    assert main(["simulate", cfg, "--out", str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_check_passes_on_shipped_configs(path, capsys):
    assert main(["check", str(path)]) == 0
    assert "ALL PASS" in capsys.readouterr().out
