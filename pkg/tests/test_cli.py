import json
import os

import numpy as np
import pytest

from tvdd import io
from tvdd.cli import EXIT_DEGENERATE, EXIT_INVALID, EXIT_OK, build_parser, config_from_args, main


def test_config_file_then_flags(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"size": 40, "overlap": 10, "outer_iters": 7}))
    args = build_parser().parse_args(["interpolate1d", "--config", str(path), "--overlap", "12", "--gap", "5", "9"])
    c = config_from_args(args)
    assert (c.size, c.overlap, c.outer_iters, c.gap) == (40, 12, 7, (5, 9))
    assert c.use_partition_correction


def test_no_partition_correction_flag():
    args = build_parser().parse_args(["inpaint2d", "--no-partition-correction"])
    assert config_from_args(args).use_partition_correction is False


def test_interpolate_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["interpolate1d", "--size", "40", "--gap", "15", "25", "--overlap", "14",
                 "--outer-iters", "10", "--out", str(out)])
    assert code == EXIT_OK
    for name in ("reconstruction.csv", "trace.csv", "component_norms.csv", "report.json"):
        assert os.path.isfile(out / name)
    assert "correction: energy" in capsys.readouterr().out


def test_same_seed_same_bytes(tmp_path):
    for d in ("a", "b"):
        assert main(["inpaint2d", "--size", "12", "--subdomains", "2", "--overlap", "2",
                     "--outer-iters", "5", "--seed", "3", "--out", str(tmp_path / d)]) == EXIT_OK
    for name in ("trace.csv", "reconstruction.pgm", "mask.pgm"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["cs-fourier", "--fraction", "0", "--size", "16"],
        ["interpolate1d", "--size", "20", "--gap", "15", "25"],
        ["interpolate1d", "--input", "/nonexistent.csv"],
        ["inpaint2d", "--size", "12", "--subdomains", "2", "--overlap", "20"],
    ],
)
def test_invalid_input_exit_code(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_INVALID


def test_bad_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    assert main(["interpolate1d", "--config", str(path), "--out", str(tmp_path)]) == EXIT_INVALID
    path.write_text("[1, 2]")
    assert main(["interpolate1d", "--config", str(path), "--out", str(tmp_path)]) == EXIT_INVALID


def test_malformed_csv(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("0.1\nabc\n")
    assert main(["interpolate1d", "--input", str(path), "--out", str(tmp_path)]) == EXIT_INVALID


def test_degenerate_exit_code(tmp_path):
    path = tmp_path / "m.csv"
    io.write_csv_signal(path, np.zeros(30))
    argv = ["interpolate1d", "--size", "30", "--mask", str(path), "--overlap", "6", "--out", str(tmp_path)]
    assert main(argv) == EXIT_DEGENERATE


def test_selftest_passes(capsys):
    assert main(["selftest"]) == EXIT_OK
    assert "FAIL" not in capsys.readouterr().out
