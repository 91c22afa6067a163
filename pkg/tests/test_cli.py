import json
import time

import numpy as np
import pytest

from varbesov.cli import main
from varbesov.config import load_config
from varbesov.corpus import band_limited_field
from varbesov.fileio import read_coefficients, read_field, write_coefficients, write_field
from varbesov.report import parse_report, strip_clock
from varbesov.sequences import CoefficientSequence


@pytest.fixture
def field_file(tmp_path, desk_grid, rng):
    path = tmp_path / "f.dat"
    write_field(path, band_limited_field(desk_grid, rng, 16.0))
    return path


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zero_field_norm_is_zero(tmp_path, desk_grid, capsys):
    path = tmp_path / "zero.dat"
    write_field(path, desk_grid.zeros())
    code, out, _ = run(["norm", "--input", path], capsys)
    rep = parse_report(out)
    assert code == 0
    assert float(rep["norm"]) == 0.0 and rep["argmax_cube"] == "null"


def test_norm_report_contents(field_file, tmp_path, capsys):
    out_path = tmp_path / "r.txt"
    code, _, _ = run(["norm", "--input", field_file, "--output", out_path], capsys)
    rep = parse_report(out_path.read_text())
    assert code == 0
    assert float(rep["norm"]) > 0 and rep["config.exponents.tau"] == "4"
    assert {"argmax_cube.level", "argmax_cube.index", "level_block_norm.0", "wall_time_s", "timestamp"} <= set(rep)
    assert rep["oracle"] == "null"  # variable exponents: no direct evaluator


def test_constant_config_matches_oracle(field_file, tmp_path, capsys):
    for space in ("B", "tilde", "B-no-tau"):
        cfg = write_config(tmp_path, {"exponents": {"alpha": "0.75", "p": "2", "q": "3", "tau": "4"},
                                      "norm": {"space": space}, "tol": 1e-13})
        code, out, _ = run(["norm", "--config", cfg, "--input", field_file], capsys)
        assert code == 0
        assert float(parse_report(out)["oracle.relative_gap"]) <= 1e-8


@pytest.mark.parametrize("space,extra", [("sharp", {}), ("star", {"gamma": 2}), ("morrey", {"u": 1.5})])
def test_other_spaces(field_file, tmp_path, capsys, space, extra):
    ex = {"p": "2", "q": "2"} if space == "morrey" else {}
    cfg = write_config(tmp_path, {"norm": {"space": space, **extra}, "exponents": ex})
    code, out, _ = run(["norm", "--config", cfg, "--input", field_file], capsys)
    assert code == 0 and float(parse_report(out)["norm"]) > 0


def test_config_errors_exit_2(field_file, tmp_path, capsys):
    bad_q = write_config(tmp_path, {"exponents": {"q": "-1"}})
    assert run(["norm", "--config", bad_q, "--input", field_file], capsys)[0] == 2
    unknown = write_config(tmp_path, {"nonsense": 1}, "u.json")
    assert run(["norm", "--config", unknown, "--input", field_file], capsys)[0] == 2
    assert run(["verify", "--suite", "bogus"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["norm"], capsys)[0] == 2  # no --input


def test_file_errors_exit_3(tmp_path, capsys):
    assert run(["norm", "--input", tmp_path / "missing.dat"], capsys)[0] == 3
    junk = tmp_path / "junk.dat"
    junk.write_bytes(b"garbage\n")
    code, _, err = run(["norm", "--input", junk], capsys)
    assert code == 3 and "file error" in err
    assert run(["norm", "--config", tmp_path / "nope.json"], capsys)[0] == 3


def test_grid_mismatch_is_file_error(tmp_path, capsys):
    from varbesov.grid import Grid

    path = tmp_path / "small.dat"
    write_field(path, Grid(1, 2, 6).zeros())
    assert run(["norm", "--input", path], capsys)[0] == 3


def test_analyze_synthesize_round_trip(field_file, tmp_path, capsys):
    coeffs, back = tmp_path / "c.txt", tmp_path / "back.dat"
    assert run(["analyze", "--input", field_file, "--output", coeffs], capsys)[0] == 0
    code, out, _ = run(["synthesize", "--input", coeffs, "--output", back], capsys)
    assert code == 0 and "sup_norm" in parse_report(out)
    f, g = read_field(field_file).data, read_field(back).data
    assert np.max(np.abs(f - g)) / np.max(np.abs(f)) <= 1e-6


def test_analyze_zero_field_writes_header_only(tmp_path, desk_grid, capsys):
    src, coeffs = tmp_path / "z.dat", tmp_path / "c.txt"
    write_field(src, desk_grid.zeros())
    assert run(["analyze", "--input", src, "--output", coeffs], capsys)[0] == 0
    assert len(coeffs.read_text().splitlines()) == 1


def test_synthesize_single_entry_gives_psi(tmp_path, desk_grid, desk_bank, capsys):
    coeffs, out = tmp_path / "c.txt", tmp_path / "psi.dat"
    lam = CoefficientSequence.from_entries(desk_grid, desk_bank.max_level, [(1, (0,), 1.0)])
    write_coefficients(coeffs, lam, desk_bank.describe())
    assert run(["synthesize", "--input", coeffs, "--output", out], capsys)[0] == 0
    psi = read_field(out).data
    assert np.max(np.abs(psi - 2.0**-0.5 * desk_bank.kernel(1).data.real)) <= 1e-12


def test_synthesize_rejects_foreign_bank(tmp_path, desk_grid, capsys):
    coeffs = tmp_path / "c.txt"
    lam = CoefficientSequence.from_entries(desk_grid, 3, [(1, (0,), 1.0)])
    write_coefficients(coeffs, lam, {"t1": 1.3, "t2": 1.7})
    assert run(["synthesize", "--input", coeffs, "--output", tmp_path / "o.dat"], capsys)[0] == 3


def test_decompose(field_file, tmp_path, capsys):
    coeffs = tmp_path / "c.txt"
    code, out, _ = run(["decompose", "--input", field_file, "--output", coeffs], capsys)
    rep = parse_report(out)
    assert code == 0 and float(rep["decomposition.residual"]) <= 1e-6
    lam, _ = read_coefficients(coeffs)
    assert lam.max_abs() > 0


def test_verify_is_reproducible_and_embeds_config(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    t0 = time.perf_counter()
    assert run(["verify", "--suite", "kernels", "--seed", 11, "--output", a], capsys)[0] == 0
    assert time.perf_counter() - t0 <= 60
    assert run(["verify", "--suite", "kernels", "--seed", 11, "--output", b], capsys)[0] == 0
    ta, tb = a.read_text(), b.read_text()
    assert strip_clock(ta) == strip_clock(tb)
    rep = parse_report(ta)
    assert rep["config.seed"] == "11" and rep["summary.status"] == "PASS"
    assert rep["check.00.status"] in ("PASS", "INFO") and "check.00.wall_time_s" in rep


def test_failed_check_exits_1(tmp_path, capsys, monkeypatch):
    from varbesov import verify

    monkeypatch.setitem(verify.SUITES, "kernels", [lambda cfg: [verify.Check("forced", False)]])
    code, _, err = run(["verify", "--suite", "kernels"], capsys)
    assert code == 1 and "FAIL: forced" in err


def test_threads_option_and_environment(field_file, capsys, monkeypatch):
    monkeypatch.setenv("VARBESOV_THREADS", "3")
    code, out, _ = run(["norm", "--input", field_file], capsys)
    assert code == 0 and parse_report(out)["threads"] == "3"
    code, out, _ = run(["norm", "--input", field_file, "--threads", 2], capsys)
    assert parse_report(out)["threads"] == "2"
    monkeypatch.setenv("VARBESOV_THREADS", "lots")
    assert run(["norm", "--input", field_file], capsys)[0] == 2


def test_non_finite_result_exits_4(field_file, capsys, monkeypatch):
    from varbesov import cli

    monkeypatch.setattr(cli, "besov_cube_norm", lambda *a, **k: type("R", (), {"value": float("inf"), "cube": None})())
    assert run(["norm", "--input", field_file], capsys)[0] == 4


def test_default_config_matches_library_defaults():
    cfg = load_config()
    assert cfg.grid.size == 4096 and cfg.V == 6
