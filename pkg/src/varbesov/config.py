"""Run configuration: grid, exponents, filter banks, seed and check parameters.

Configs are JSON objects; every key is optional and missing keys take the
desk-scale defaults below.  :func:`load_config` validates everything up
front and raises :class:`ConfigError` with a readable message.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass

from .exponents import ExponentError, parse_exponent
from .expression import ExpressionSyntaxError
from .filterbank import build_filterbank
from .grid import Grid

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config"]


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 2)."""


DEFAULTS = {
    "grid": {"dim": 1, "box_exponent": 4, "resolution_exponent": 8},
    "exponents": {
        "alpha": "0.5 + 0.2*sin(2*pi*x/16)",
        "p": "2 + 0.5*cos(2*pi*x/16)",
        "q": "2",
        "tau": "4",
    },
    "bank": {"t1": 1.1, "t2": 1.9},
    "second_bank": {"t1": 1.05, "t2": 1.75},
    "levels": None,
    "norm": {"space": "B", "tilde": False, "gamma": 1, "u": None},
    "seed": 20240601,
    "corpus_size": 20,
    "tol": 1e-10,
    "lambda_star": {"r": 0.5, "d": None, "d_below": 1.05},
}

_SPACES = ("B", "tilde", "B-no-tau", "morrey", "sharp", "star")


def _merge(base: dict, extra: dict, path=""):
    for key, value in extra.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, path + key + ".")
        else:
            base[key] = value


@dataclass
class RunConfig:
    """Resolved configuration with the objects built from it."""

    data: dict

    def __post_init__(self):
        d = self.data
        try:
            g = d["grid"]
            self.grid = Grid(int(g["dim"]), int(g["box_exponent"]), int(g["resolution_exponent"]))
            self.bank = build_filterbank(self.grid, float(d["bank"]["t1"]), float(d["bank"]["t2"]))
            self.second_bank = build_filterbank(
                self.grid, float(d["second_bank"]["t1"]), float(d["second_bank"]["t2"])
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigError(f"grid/bank: {exc}") from exc
        V = self.bank.max_level if d["levels"] is None else d["levels"]
        if not isinstance(V, int) or not 1 <= V <= self.bank.max_level:
            raise ConfigError(f"levels must be an integer in 1..{self.bank.max_level}")
        self.V = V
        ex = d["exponents"]
        try:
            self.alpha = parse_exponent(str(ex["alpha"]), self.grid, "real")
            self.p = parse_exponent(str(ex["p"]), self.grid)
            self.q = parse_exponent(str(ex["q"]), self.grid)
            self.tau = None if ex["tau"] is None else parse_exponent(str(ex["tau"]), self.grid)
        except (ExpressionSyntaxError, ExponentError, ValueError) as exc:
            raise ConfigError(f"exponent: {exc}") from exc
        if self.alpha.has_infinity:
            raise ConfigError("alpha must be finite")
        if self.q.has_infinity and not self.q.is_infinite:
            raise ConfigError("q = inf is only supported as a constant exponent")
        norm = d["norm"]
        if norm["space"] not in _SPACES:
            raise ConfigError(f"norm.space must be one of {', '.join(_SPACES)}")
        if norm["space"] == "B" and self.tau is None:
            raise ConfigError("this norm needs exponents.tau")
        if not isinstance(norm["tilde"], bool):
            raise ConfigError("norm.tilde must be true or false")
        if norm["space"] in ("sharp", "star") and not norm["tilde"] and self.tau is None:
            raise ConfigError("this norm needs exponents.tau")
        if norm["space"] == "star" and (not isinstance(norm["gamma"], int) or norm["gamma"] < 0):
            raise ConfigError("norm.gamma must be a non-negative integer")
        if norm["space"] == "morrey":
            if not (self.p.is_constant and self.q.is_constant):
                raise ConfigError("the Besov-Morrey norm needs constant p and q")
            u = norm["u"]
            if not isinstance(u, (int, float)) or not 0 < u <= self.p.constant_value:
                raise ConfigError("norm.u must satisfy 0 < u <= p")
        if not isinstance(d["seed"], int):
            raise ConfigError("seed must be an integer")
        if not isinstance(d["corpus_size"], int) or d["corpus_size"] < 1:
            raise ConfigError("corpus_size must be a positive integer")
        tol = d["tol"]
        if not isinstance(tol, (int, float)) or not 0 < tol < 1:
            raise ConfigError("tol must lie in (0, 1)")

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        data = copy.deepcopy(self.data)
        data["seed"] = int(seed)
        return RunConfig(data)

    def flat(self) -> dict:
        """The resolved config as dotted ``key -> value`` pairs."""
        out = {}

        def walk(prefix, node):
            for k, v in node.items():
                if isinstance(v, dict):
                    walk(prefix + k + ".", v)
                else:
                    out[prefix + k] = v

        walk("", self.data)
        return out


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read a JSON config (or take the defaults) and validate it.

    An unreadable file raises ``OSError`` (a file error, not a config error).
    """
    data = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        _merge(data, user)
    if overrides:
        _merge(data, overrides)
    return RunConfig(data)
