"""``varbesov`` command-line front end.

Subcommands::

    varbesov norm       --input FIELD [--config CFG] [--output REPORT]
    varbesov analyze    --input FIELD --output COEFFS
    varbesov synthesize --input COEFFS --output FIELD
    varbesov decompose  --input FIELD --output COEFFS
    varbesov verify     [--suite kernels|norms|transform|atoms|all]

Exit codes: 0 success, 1 a verification check failed, 2 configuration
error, 3 file error, 4 non-finite result.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .atoms import quasi_atomic_decomposition
from .besov import (
    BesovParams,
    besov_cube_norm,
    besov_morrey_norm,
    besov_variable_norm,
    classical_besov_norm,
    classical_besov_type_norm,
    weighted_blocks,
)
from .config import ConfigError, load_config
from .fileio import FileFormatError, read_coefficients, read_field, write_coefficients, write_field
from .report import Report
from .sequences import inverse_phi_transform, phi_transform
from .varlp import luxemburg_norm
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_FILE, EXIT_NUMERIC = 0, 1, 2, 3, 4


class NumericalFailure(RuntimeError):
    pass


def _threads(args):
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        return args.threads
    env = os.environ.get("VARBESOV_THREADS")
    if not env:
        return None
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"VARBESOV_THREADS={env!r} is not an integer") from None
    if n < 1:
        raise ConfigError("VARBESOV_THREADS must be positive")
    return n


def _config(args):
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed)


def _base_report(title, cfg, threads) -> Report:
    rep = Report(title)
    rep.add("varbesov_version", __version__)
    rep.update(cfg.flat(), prefix="config.")
    rep.add("threads", threads if threads is not None else 1)
    return rep


def _emit(rep: Report, path) -> None:
    text = rep.render()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _check_finite(**values):
    for k, v in values.items():
        if v is not None and not math.isfinite(v):
            raise NumericalFailure(f"{k} is not finite ({v})")


def _require_grid(f, cfg):
    if f.grid != cfg.grid:
        raise FileFormatError(
            f"field grid {f.grid.describe()} does not match the configured grid {cfg.grid.describe()}"
        )


def _oracle(f, cfg, space, prm):
    """Direct evaluator for constant exponents, or None when none applies."""
    consts = [cfg.alpha, cfg.p, cfg.q] + ([cfg.tau] if cfg.tau is not None else [])
    if not all(e.is_constant for e in consts) or cfg.q.has_infinity:
        return None
    a, p, q = cfg.alpha.constant_value, cfg.p.constant_value, cfg.q.constant_value
    if space == "B":
        return classical_besov_type_norm(f, a, p, q, 1.0 / cfg.tau.constant_value, cfg.bank, cfg.V)
    if space == "tilde":
        return classical_besov_type_norm(f, a, p, q, 1.0 / p, cfg.bank, cfg.V)
    if space == "B-no-tau":
        return classical_besov_norm(f, a, p, q, cfg.bank, cfg.V)
    return None


def cmd_norm(args) -> int:
    threads = _threads(args)
    cfg = _config(args)
    if args.input is None:
        raise ConfigError("norm needs --input")
    f = read_field(args.input)
    _require_grid(f, cfg)
    t0 = time.perf_counter()
    settings = cfg.data["norm"]
    space = settings["space"]
    prm = BesovParams(cfg.alpha, cfg.p, cfg.q, cfg.tau, cfg.bank, cfg.V)
    tol = cfg.data["tol"]
    cube = None
    if space in ("B", "tilde", "sharp", "star"):
        family = "tilde" if space == "tilde" or (space in ("sharp", "star") and settings["tilde"]) else "B"
        variant = space if space in ("sharp", "star") else "base"
        res = besov_cube_norm(f, prm, space=family, variant=variant, gamma=int(settings["gamma"]),
                              tol=tol, threads=threads)
        value, cube = res.value, res.cube
        oracle = _oracle(f, cfg, family, prm) if variant == "base" else None
    elif space == "B-no-tau":
        value = besov_variable_norm(f, cfg.alpha, cfg.p, cfg.q, cfg.bank, cfg.V, tol)
        oracle = _oracle(f, cfg, space, prm)
    else:
        q = math.inf if cfg.q.is_infinite else cfg.q.constant_value
        value = besov_morrey_norm(f, cfg.alpha, cfg.p.constant_value, q, float(settings["u"]), cfg.bank, cfg.V)
        oracle = None
    _, mags = weighted_blocks(f, cfg.alpha, cfg.bank, cfg.V)
    levels = {v: luxemburg_norm(cfg.p, cfg.grid.field(m), tol) for v, m in enumerate(mags)}
    _check_finite(norm=value, **{f"level {v}": x for v, x in levels.items()})
    wall = time.perf_counter() - t0

    rep = _base_report("varbesov norm", cfg, threads)
    rep.add("input", os.path.abspath(args.input))
    rep.add("space", space)
    rep.add("norm", value)
    for v, x in levels.items():
        rep.add(f"level_block_norm.{v}", x)
    if cube is None or value == 0:
        rep.add("argmax_cube", None)
    else:
        rep.add("argmax_cube.level", cube.v)
        rep.add("argmax_cube.index", list(cube.m))
        rep.add("argmax_cube.corner", list(cube.corner))
        rep.add("argmax_cube.side", cube.side)
    if oracle is not None:
        gap = abs(value - oracle) / oracle if oracle > 0 else abs(value)
        rep.add("oracle.value", oracle)
        rep.add("oracle.relative_gap", gap)
    else:
        rep.add("oracle", None)
    rep.add("wall_time_s", wall)
    rep.stamp()
    _emit(rep, args.output)
    return EXIT_OK


def _need_output(args, name):
    if args.input is None or args.output is None:
        raise ConfigError(f"{name} needs --input and --output")


def cmd_analyze(args) -> int:
    threads = _threads(args)
    cfg = _config(args)
    _need_output(args, "analyze")
    f = read_field(args.input)
    _require_grid(f, cfg)
    t0 = time.perf_counter()
    lam = phi_transform(f, cfg.bank, cfg.V)
    _check_finite(max_coefficient=lam.max_abs())
    write_coefficients(args.output, lam, cfg.bank.describe())
    rep = _base_report("varbesov analyze", cfg, threads)
    rep.add("input", os.path.abspath(args.input))
    rep.add("output", os.path.abspath(args.output))
    rep.add("nonzero_coefficients", sum(1 for _ in lam.entries()))
    rep.add("max_abs_coefficient", lam.max_abs())
    rep.add("wall_time_s", time.perf_counter() - t0)
    rep.stamp()
    _emit(rep, None)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    threads = _threads(args)
    cfg = _config(args)
    _need_output(args, "synthesize")
    lam, header = read_coefficients(args.input)
    if lam.grid != cfg.grid:
        raise FileFormatError("coefficient grid does not match the configured grid")
    bank = header.get("bank") or {}
    if bank and bank != cfg.bank.describe():
        raise FileFormatError(f"coefficients were made with bank {bank}, config has {cfg.bank.describe()}")
    if lam.V > cfg.bank.max_level:
        raise FileFormatError(f"V = {lam.V} exceeds the bank's top level {cfg.bank.max_level}")
    t0 = time.perf_counter()
    f = inverse_phi_transform(lam, cfg.bank)
    _check_finite(sup=f.sup_norm())
    write_field(args.output, f)
    rep = _base_report("varbesov synthesize", cfg, threads)
    rep.add("input", os.path.abspath(args.input))
    rep.add("output", os.path.abspath(args.output))
    rep.add("sup_norm", f.sup_norm())
    rep.add("wall_time_s", time.perf_counter() - t0)
    rep.stamp()
    _emit(rep, None)
    return EXIT_OK


def cmd_decompose(args) -> int:
    threads = _threads(args)
    cfg = _config(args)
    _need_output(args, "decompose")
    f = read_field(args.input)
    _require_grid(f, cfg)
    t0 = time.perf_counter()
    prm = BesovParams(cfg.alpha, cfg.p, cfg.q, cfg.tau, cfg.bank, cfg.bank.max_level) if cfg.tau is not None else None
    lam, info = quasi_atomic_decomposition(f, cfg.bank, prm)
    _check_finite(residual=info["residual"], ratio=info.get("ratio"))
    write_coefficients(args.output, lam, cfg.bank.describe())
    rep = _base_report("varbesov decompose", cfg, threads)
    rep.add("input", os.path.abspath(args.input))
    rep.add("output", os.path.abspath(args.output))
    rep.update(info, prefix="decomposition.")
    rep.add("wall_time_s", time.perf_counter() - t0)
    rep.stamp()
    _emit(rep, None)
    return EXIT_OK


def cmd_verify(args) -> int:
    threads = _threads(args)
    if args.suite != "all" and args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join([*SUITES, 'all'])}")
    cfg = _config(args)
    t0 = time.perf_counter()
    checks = run_suite(cfg, args.suite)
    wall = time.perf_counter() - t0
    rep = _base_report("varbesov verify", cfg, threads)
    rep.add("suite", args.suite)
    failed = [c for c in checks if not c.informational and not c.passed]
    for k, c in enumerate(checks):
        key = f"check.{k:02d}"
        rep.add(f"{key}.name", c.name)
        rep.add(f"{key}.status", c.status)
        rep.update(c.measured, prefix=f"{key}.")
        rep.add(f"{key}.wall_time_s", c.wall_time_s)
    rep.add("summary.checks", len(checks))
    rep.add("summary.failed", len(failed))
    rep.add("summary.informational", sum(c.informational for c in checks))
    rep.add("summary.status", "FAIL" if failed else "PASS")
    rep.add("wall_time_s", wall)
    rep.stamp()
    _emit(rep, args.output)
    for c in failed:
        print(f"FAIL: {c.name}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varbesov", description="Variable-exponent Besov-type spaces on periodic grids.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults are used otherwise)")
    common.add_argument("--input", metavar="PATH")
    common.add_argument("--output", metavar="PATH")
    common.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads (default: VARBESOV_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("norm", cmd_norm, "norm of a field in the configured space"),
        ("analyze", cmd_analyze, "phi-transform coefficients of a field"),
        ("synthesize", cmd_synthesize, "field from a coefficient file"),
        ("decompose", cmd_decompose, "quasi-atomic decomposition of a field"),
        ("verify", cmd_verify, "run the verification battery"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.set_defaults(func=fn)
        if name == "verify":
            p.add_argument("--suite", default="all", metavar="NAME", help="kernels, norms, transform, atoms or all")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are configuration errors
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        with np.errstate(over="ignore"):
            return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileFormatError, OSError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (NumericalFailure, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
