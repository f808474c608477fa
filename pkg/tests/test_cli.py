import json
import subprocess
import sys

import numpy as np
import pytest

from ssnmf.cli import build_parser, main
from ssnmf.io import read_matrix, write_matrix, write_sidecar

SUBCOMMANDS = ("synth", "extract", "abundances", "eval", "maps", "bench")


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def instance(tmp_path):
    assert run("synth", "--m", 30, "--n", 300, "--r", 5, "--alpha", 0.05, "--eps", 0.05,
               "--seed", 3, "--out", tmp_path / "data") == 0
    return tmp_path / "data"


def test_synth_writes_three_files(instance):
    X, W, H = (read_matrix(instance / f"{n}.ssnmf") for n in "XWH")
    assert X.shape == (30, 300) and W.shape == (30, 5) and H.shape == (5, 300)


def test_sspa_extract_is_byte_identical(instance, tmp_path):
    for name in ("a", "b"):
        assert run("extract", "--algo", "sspa", "--r", 5, "--p", 20, "--agg", "median",
                   "--in", instance / "X.ssnmf", "--out", tmp_path / f"{name}.ssnmf") == 0
    assert (tmp_path / "a.ssnmf").read_bytes() == (tmp_path / "b.ssnmf").read_bytes()
    sets = json.loads((tmp_path / "a.ssnmf.sets.json").read_text())
    assert sets["algorithm"] == "sspa" and len(sets["selected_sets"]) == 5


def test_noiseless_pipeline(tmp_path, capsys):
    data = tmp_path / "d"
    assert run("synth", "--alpha", 0.05, "--eps", 0, "--n", 1000, "--r", 10, "--seed", 7, "--out", data) == 0
    assert run("extract", "--algo", "spa", "--r", 10, "--in", data / "X.ssnmf", "--out", tmp_path / "W.ssnmf") == 0
    capsys.readouterr()
    assert run("eval", "--true", data / "W.ssnmf", "--est", tmp_path / "W.ssnmf") == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert float(out["mrsa_total"]) < 1e-10


def test_randomized_extract_needs_seed_and_is_reproducible(instance, tmp_path):
    args = ["extract", "--algo", "svca", "--r", 5, "--p", 5, "--in", instance / "X.ssnmf"]
    assert run(*args, "--out", tmp_path / "w.ssnmf") == 1
    for name in ("a", "b"):
        assert run(*args, "--seed", 4, "--trials", 3, "--out", tmp_path / f"{name}.ssnmf") == 0
    assert (tmp_path / "a.ssnmf").read_bytes() == (tmp_path / "b.ssnmf").read_bytes()


def test_p_zero_is_usage_error(instance, tmp_path, capsys):
    code = run("extract", "--algo", "svca", "--p", 0, "--r", 5, "--seed", 1,
               "--in", instance / "X.ssnmf", "--out", tmp_path / "w.ssnmf")
    assert code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run("eval", "--frobnicate") == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_help_documents_flags(command, capsys):
    assert main([command, "--help"]) == 0
    text = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text


def test_format_error_exit_code(tmp_path):
    (tmp_path / "bad.ssnmf").write_bytes(b"SSNMF2" + bytes(16))
    assert run("extract", "--algo", "spa", "--r", 1, "--in", tmp_path / "bad.ssnmf",
               "--out", tmp_path / "w.ssnmf") == 2
    assert run("eval", "--true", tmp_path / "missing.ssnmf", "--est", tmp_path / "bad.ssnmf") == 2


def test_rank_deficiency_exit_code(tmp_path):
    write_matrix(tmp_path / "x.ssnmf", np.outer([1.0, 2.0, 3.0], np.arange(1.0, 7.0)))
    assert run("extract", "--algo", "spa", "--r", 2, "--in", tmp_path / "x.ssnmf",
               "--out", tmp_path / "w.ssnmf") == 3


def test_abundances_and_relative_error(instance, tmp_path, capsys):
    assert run("abundances", "--in", instance / "X.ssnmf", "--w", instance / "W.ssnmf",
               "--out", tmp_path / "H.ssnmf") == 0
    H = read_matrix(tmp_path / "H.ssnmf")
    assert H.shape == (5, 300) and np.all(H >= 0)
    capsys.readouterr()
    assert run("eval", "--in", instance / "X.ssnmf", "--w", instance / "W.ssnmf") == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    # true W leaves only (part of) the 5% noise
    assert 0 < float(out["relative_error"]) <= 0.05


def test_cube_clipping_and_maps(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.random((4, 24))
    X[:, 7] = 50.0
    write_matrix(tmp_path / "cube.ssnmf", X)
    write_sidecar(tmp_path / "cube.json", 6, 4, 4)
    assert run("extract", "--algo", "spa", "--r", 3, "--in", tmp_path / "cube.ssnmf",
               "--out", tmp_path / "W.ssnmf", "--clip-k", 1) == 0
    sets = json.loads((tmp_path / "W.ssnmf.sets.json").read_text())
    assert 7 not in [j for S in sets["selected_sets"] for j in S]
    assert run("maps", "--in", tmp_path / "cube.ssnmf", "--w", tmp_path / "W.ssnmf",
               "--out", tmp_path / "maps") == 0
    assert sorted(p.name for p in (tmp_path / "maps").iterdir()) == [
        "endmember_01.pgm", "endmember_02.pgm", "endmember_03.pgm"]


def test_maps_needs_geometry(tmp_path):
    write_matrix(tmp_path / "H.ssnmf", np.ones((2, 6)))
    assert run("maps", "--h", tmp_path / "H.ssnmf", "--out", tmp_path / "m") == 1
    assert run("maps", "--h", tmp_path / "H.ssnmf", "--width", 3, "--height", 2, "--out", tmp_path / "m") == 0


def test_bench_command(tmp_path):
    cfg = {"algorithms": ["spa", {"algorithm": "svca", "p": 3}], "trials": 2, "m": 12, "n": 60, "r": 3,
           "epsilons": [0.05], "statistics": ["median"], "base_seed": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert run("bench", "--config", tmp_path / "cfg.json", "--out", tmp_path / "a.csv") == 0
    assert run("bench", "--config", tmp_path / "cfg.json", "--out", tmp_path / "b.csv", "--workers", 2) == 0
    a = (tmp_path / "a.csv").read_text().splitlines()
    b = (tmp_path / "b.csv").read_text().splitlines()
    assert len(a) == 3
    # identical apart from wall time
    assert [line.rsplit(",", 1)[0] for line in a] == [line.rsplit(",", 1)[0] for line in b]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ssnmf", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
