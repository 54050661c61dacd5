import json
import subprocess
import sys

import numpy as np
import pytest

from pgvdenoise import io
from pgvdenoise.cli import main
from pgvdenoise.core import ScalarImage
from pgvdenoise.synthetic import synthetic_pair


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


@pytest.fixture
def const_pgm(tmp_path):
    path = tmp_path / "const.pgm"
    io.save_pgm(np.full((6, 6), 120.0), path)
    return path


@pytest.fixture
def pair_files(tmp_path):
    pair = synthetic_pair(10, 10, sigma=25.0, seed=3)
    io.save_image(pair.clean, tmp_path / "clean.f64")
    io.save_image(pair.noisy, tmp_path / "noisy.f64")
    return tmp_path / "clean.f64", tmp_path / "noisy.f64", pair


def test_missing_input_is_usage_error(tmp_path, capsys):
    assert main(["denoise", "--output", str(tmp_path / "o.pgm")]) == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("flag,value", [("--s", "1.5"), ("--t", "-0.1"), ("--alpha0", "0"),
                                        ("--max-iters", "0"), ("--tol", "abc")])
def test_range_violation_is_usage_error(const_pgm, tmp_path, flag, value):
    assert main(["denoise", "--input", str(const_pgm), "--output", str(tmp_path / "o.pgm"),
                 flag, value]) == 2


def test_no_command_is_usage_error():
    assert main([]) == 2


def test_denoise_constant_image(const_pgm, tmp_path, capsys):
    out = tmp_path / "o.pgm"
    assert main(["denoise", "--input", str(const_pgm), "--output", str(out),
                 "--alpha0", "3", "--alpha1", "0.5"]) == 0
    assert io.load_pgm(out) == io.load_pgm(const_pgm)
    fields = kv(capsys.readouterr().out)
    assert float(fields["objective"]) == 0 and fields["converged"] == "true"
    assert set(fields) == {"objective", "iterations", "residual", "converged"}


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert main(["denoise", "--input", str(tmp_path / "nope.pgm"),
                 "--output", str(tmp_path / "o.pgm")]) == 1
    assert "error:" in capsys.readouterr().err


def test_train_single_point_matches_denoise(pair_files, tmp_path, capsys):
    clean, noisy, pair = pair_files
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("grid.alpha0_values = 4\ngrid.alpha1_values = 8\n"
                   "grid.s_values = 0.25\ngrid.t_values = 0.75\nsolver.tolerance = 1e-5\n")
    assert main(["train", "--clean", str(clean), "--noisy", str(noisy),
                 "--grid-config", str(cfg), "--out-json", str(tmp_path / "r.json")]) == 0
    trained = kv(capsys.readouterr().out)
    assert main(["denoise", "--input", str(noisy), "--output", str(tmp_path / "u.f64"),
                 "--alpha0", "4", "--alpha1", "8", "--s", "0.25", "--t", "0.75",
                 "--tol", "1e-5"]) == 0
    u = io.load_image(tmp_path / "u.f64").values
    assert float(trained["cost"]) == np.sqrt(np.sum((u - pair.clean.values) ** 2))
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["optimum"] == {"alpha0": 4.0, "alpha1": 8.0, "s": 0.25, "t": 0.75}


def test_train_constant_pair(const_pgm, tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("grid.alpha0_values = 0.5, 1\ngrid.alpha1_values = 1\n"
                   "grid.s_values = 0, 1\ngrid.t_values = 0.5\n")
    assert main(["train", "--clean", str(const_pgm), "--noisy", str(const_pgm),
                 "--grid-config", str(cfg), "--out-json", str(tmp_path / "r.json")]) == 0
    assert float(kv(capsys.readouterr().out)["cost"]) == 0


def test_train_size_mismatch(const_pgm, tmp_path):
    other = tmp_path / "other.pgm"
    io.save_pgm(np.zeros((5, 6)), other)
    assert main(["train", "--clean", str(const_pgm), "--noisy", str(other),
                 "--out-json", str(tmp_path / "r.json")]) == 1


def test_train_bad_config_is_runtime_error(const_pgm, tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("grid.colour = 3\n")
    assert main(["train", "--clean", str(const_pgm), "--noisy", str(const_pgm),
                 "--grid-config", str(cfg), "--out-json", str(tmp_path / "r.json")]) == 1
    assert "line 1" in capsys.readouterr().err


def test_train_output_independent_of_parallelism(pair_files, tmp_path):
    clean, noisy, _ = pair_files
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("grid.alpha0_values = 2, 8\ngrid.alpha1_values = 4, 16\n"
                   "grid.s_values = 0, 1\ngrid.t_values = 0, 0.5\nsolver.tolerance = 1e-4\n")
    outs = []
    for par in ("1", "4"):
        out = tmp_path / f"r{par}.json"
        assert main(["train", "--clean", str(clean), "--noisy", str(noisy), "--grid-config",
                     str(cfg), "--parallelism", par, "--out-json", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_seminorm_constant(const_pgm, capsys):
    assert main(["seminorm", "--input", str(const_pgm)]) == 0
    fields = kv(capsys.readouterr().out)
    assert float(fields["tv"]) == 0 and float(fields["pgv2"]) == 0


def test_noise_sigma_zero(tmp_path, rng):
    src = tmp_path / "in.f64"
    io.save_image(ScalarImage(rng.normal(size=(4, 4))), src)
    assert main(["noise", "--input", str(src), "--output", str(tmp_path / "out.f64"),
                 "--sigma", "0", "--seed", "9"]) == 0
    assert io.load_image(tmp_path / "out.f64") == io.load_image(src)


def test_noise_repeatable(const_pgm, tmp_path):
    for name in ("a.pgm", "b.pgm"):
        assert main(["noise", "--input", str(const_pgm), "--output", str(tmp_path / name),
                     "--sigma", "20", "--seed", "5"]) == 0
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_noise_negative_sigma(const_pgm, tmp_path):
    assert main(["noise", "--input", str(const_pgm), "--output", str(tmp_path / "o.pgm"),
                 "--sigma", "-1"]) == 2


def test_landscape_two_by_two(pair_files, tmp_path, capsys):
    clean, noisy, _ = pair_files
    out = tmp_path / "land.tsv"
    assert main(["landscape", "--clean", str(clean), "--noisy", str(noisy), "--alpha0", "4",
                 "--alpha1", "8", "--s-values", "0,1", "--t-values", "0.25,0.75",
                 "--output", str(out), "--tol", "1e-4"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[0] == "s\t0.25\t0.75"
    assert all(len(line.split("\t")) == 3 for line in lines)
    assert kv(capsys.readouterr().out)["rows"] == "2"


def test_landscape_bad_value_list(pair_files, tmp_path):
    clean, noisy, _ = pair_files
    assert main(["landscape", "--clean", str(clean), "--noisy", str(noisy), "--alpha0", "4",
                 "--alpha1", "8", "--s-values", "0,2", "--t-values", "0",
                 "--output", str(tmp_path / "x")]) == 2


def test_module_entry_point(const_pgm):
    proc = subprocess.run([sys.executable, "-m", "pgvdenoise", "seminorm", "--input",
                           str(const_pgm)], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert kv(proc.stdout) == {"tv": "0.0", "pgv2": "0.0"}
