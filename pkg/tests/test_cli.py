import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fermidrive.cli import main
from fermidrive.config import load_config
from fermidrive.errors import ConfigError
from fermidrive.models import save_matrix_file


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _json(path):
    return json.loads(path.read_text())


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    return main([*argv, "--out", str(out)]), out


def test_evolve_zero_steps(tmp_path):
    code, out = _run(tmp_path, "e", "evolve", "--chain", "4", "--initial", "domain_wall", "--wall-site", "2")
    assert code == 0
    rows = _rows(out / "trajectory.csv")
    assert len(rows) == 1
    assert list(rows[0]) == ["step", "time", "nbar", "n_1", "n_2", "n_3", "n_4"]
    assert [float(rows[0][f"n_{i}"]) for i in range(1, 5)] == [0, 0, 1, 1]
    assert len(_rows(out / "occupations.csv")) == 4
    assert _json(out / "evolve.json")["schema_version"] == 1


def test_evolve_rows_and_nbar(tmp_path):
    code, out = _run(tmp_path, "e", "evolve", "--chain", "6", "--r", "0.5", "--steps", "20",
                     "--stride", "5", "--checkpoint-stride", "10")
    assert code == 0
    rows = _rows(out / "trajectory.csv")
    assert [int(r["step"]) for r in rows] == [0, 5, 10, 15, 20]
    for r in rows:
        dens = [float(r[f"n_{i}"]) for i in range(1, 7)]
        assert abs(float(r["nbar"]) - np.mean(dens)) < 1e-12
    assert {int(r["step"]) for r in _rows(out / "occupations.csv")} == {0, 10, 20}


@pytest.mark.parametrize("cmd", [
    ["evolve", "--chain", "5", "--r", "0.3", "--steps", "30", "--initial", "random", "--seed", "7"],
    ["steady", "--chain", "5", "--r", "0.2"],
    ["phi", "--chain", "9", "--b", "7"],
    ["oracle", "--chain", "3", "--r", "0.4", "--initial", "random", "--seed", "3"],
    ["sweep", "--chain", "4", "--set", "sweep.alpha=0.2,0.5,0.8", "--set", "sweep.r=0.1,0.3"],
])
def test_byte_for_byte_determinism(tmp_path, cmd, monkeypatch):
    monkeypatch.setenv("FERMIDRIVE_THREADS", "3")
    assert _run(tmp_path, "one", *cmd)[0] == 0
    assert _run(tmp_path, "two", *cmd)[0] == 0
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "two").iterdir())
    for name in names:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_steady_pure_injection(tmp_path):
    code, out = _run(tmp_path, "s", "steady", "--chain", "4", "--alpha", "1", "--r", "0.2")
    assert code == 0
    assert all(abs(float(r["phi_k"]) - 1) < 1e-10 for r in _rows(out / "steady_diag.csv"))


def test_steady_small_r_residual(tmp_path):
    code, out = _run(tmp_path, "s", "steady", "--chain", "8", "--r", "1e-3", "--b", "7")
    assert code == 0
    meta = _json(out / "steady.json")
    assert meta["residual"] < 1e-10 and meta["unique"] is True


def test_steady_disconnected_matrix(tmp_path):
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = 1.0
    h[2, 2] = 0.5
    path = tmp_path / "h.txt"
    save_matrix_file(path, h)
    code, out = _run(tmp_path, "s", "steady", "--matrix", str(path), "--b", "2", "--r", "0.4")
    assert code == 0
    meta = _json(out / "steady.json")
    assert meta["unique"] is False and meta["kernel_dimension"] >= 1


def test_steady_fixed_point(tmp_path):
    code, out = _run(tmp_path, "s", "steady", "--chain", "6", "--r", "0.3", "--method", "fixed_point")
    assert code == 0
    meta = _json(out / "steady.json")
    assert meta["method"] == "fixed_point" and meta["unique"] is None


def test_phi_mirror_and_pure(tmp_path):
    code, out = _run(tmp_path, "p", "phi", "--chain", "10", "--alpha", "0.3")
    assert code == 0
    assert all(abs(float(r["phi_k"]) - 0.3) < 1e-10 for r in _rows(out / "phi.csv"))
    meta = _json(out / "phi.json")
    assert {"A", "B", "Q_aa", "Q_bb", "Q_ab", "mu"} <= set(meta)
    code, out = _run(tmp_path, "q", "phi", "--chain", "10", "--alpha", "1", "--b", "7")
    assert code == 0
    assert all(abs(float(r["phi_k"]) - 1) < 1e-10 for r in _rows(out / "phi.csv"))


def test_phi_vanishing_mu_is_numeric(tmp_path):
    assert _run(tmp_path, "p", "phi", "--chain", "5", "--a", "2", "--b", "4")[0] == 2


def test_lindblad(tmp_path):
    code, out = _run(tmp_path, "l", "lindblad", "--chain", "6", "--set", "lindblad.gamma_b=0")
    assert code == 0
    assert all(abs(float(r["phi_exact"]) - 1) < 1e-10 for r in _rows(out / "lindblad_steady.csv"))
    code, out = _run(tmp_path, "m", "lindblad", "--chain", "4", "--set", "lindblad.gamma_a=0.3",
                     "--set", "lindblad.gamma_b=0.5", "--set", "lindblad.steps=20",
                     "--set", "lindblad.dt=0.04", "--set", "lindblad.order_check=true")
    assert code == 0
    assert 12 < _json(out / "lindblad.json")["order_ratio"] < 20
    assert len(_rows(out / "lindblad_trajectory.csv")) == 21


def test_oracle(tmp_path):
    code, out = _run(tmp_path, "o", "oracle", "--chain", "3", "--r", "0.3")
    assert code == 0
    assert _json(out / "oracle.json")["max_abs_dev"] < 1e-10
    code, out = _run(tmp_path, "z", "oracle", "--chain", "3", "--r", "0", "--initial", "random")
    assert code == 0
    assert all(float(r["spectrum_drift"]) < 1e-10 for r in _rows(out / "oracle.csv"))
    assert _run(tmp_path, "big", "oracle", "--chain", "11")[0] == 1


def test_sweep(tmp_path):
    code, out = _run(tmp_path, "w", "sweep", "--chain", "6", "--set", "sweep.alpha=0.2,0.6",
                     "--set", "sweep.r=0.01,0.02")
    assert code == 0
    rows = _rows(out / "sweep.csv")
    assert len(rows) == 4
    assert [(float(r["r"]), float(r["alpha"])) for r in rows] == [(0.01, 0.2), (0.01, 0.6), (0.02, 0.2), (0.02, 0.6)]
    for r in rows:
        assert all(abs(float(r[f"phi_{k}"]) - float(r["alpha"])) < 1e-10 for k in range(1, 7))


def test_sweep_single_point_matches_steady(tmp_path):
    args = ["--chain", "5", "--r", "0.2", "--alpha", "0.4", "--b", "3"]
    assert _run(tmp_path, "s", "steady", *args)[0] == 0
    assert _run(tmp_path, "w", "sweep", *args)[0] == 0
    row = _rows(tmp_path / "w" / "sweep.csv")[0]
    diag = _rows(tmp_path / "s" / "steady_diag.csv")
    assert [row[f"occ_{k}"] for k in range(1, 6)] == [d["phi_k"] for d in diag]


def test_sweep_records_point_errors(tmp_path):
    code, out = _run(tmp_path, "w", "sweep", "--chain", "4", "--set", "sweep.b=1,4")
    assert code == 0
    rows = _rows(out / "sweep.csv")
    assert "InvalidProtocol" in rows[0]["error"] and rows[1]["error"] == ""


def test_config_file_and_flag_precedence(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[model]\nchain = 6\n[protocol]\nr = 0.2  # attempt rate\nalpha = 0.4\n[run]\nsteps = 3\n")
    cfg = load_config(ini, ["protocol.alpha=0.9"])
    assert cfg.chain == 6 and cfg.r == 0.2 and cfg.alpha == 0.9 and cfg.steps == 3
    code, out = _run(tmp_path, "c", "evolve", "--config", str(ini), "--alpha", "0.9")
    assert code == 0
    assert _json(out / "evolve.json")["config"]["alpha"] == 0.9


@pytest.mark.parametrize("argv", [
    ["evolve"],
    ["evolve", "--chain", "4", "--matrix", "x.txt"],
    ["evolve", "--chain", "4", "--stride", "0"],
    ["evolve", "--chain", "4", "--r", "abc"],
    ["evolve", "--chain", "4", "--b", "9"],
    ["evolve", "--chain", "4", "--alpha", "1.5"],
    ["evolve", "--chain", "4", "--set", "nosuch.key=1"],
    ["evolve", "--chain", "1"],
])
def test_config_errors_exit_1(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == 1


def test_unknown_subcommand_exit_1():
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 1


def test_bad_override_syntax():
    with pytest.raises(ConfigError):
        load_config(None, ["model.matrix"])


def test_malformed_matrix_file_exit_1(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2\n1 2\n")
    assert main(["steady", "--matrix", str(path), "--out", str(tmp_path)]) == 1


def test_missing_matrix_file_exit_3(tmp_path):
    assert main(["steady", "--matrix", str(tmp_path / "missing.txt"), "--out", str(tmp_path)]) == 3


def test_unwritable_output_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["phi", "--chain", "4", "--out", str(blocker / "sub")]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fermidrive", "phi", "--chain", "4", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "phi.csv").exists()
