"""Plain-text reports made of ``key: value`` lines.

Nested mappings are flattened with dots, floats use ``repr`` and keys keep
insertion order, so a report is a deterministic function of its inputs.
The only clock readings are the ``timestamp`` line and ``*wall_time_s``
lines; :func:`strip_clock` drops them for comparisons.
"""

from __future__ import annotations

import datetime
import math

__all__ = ["Report", "format_value", "strip_clock", "parse_report"]


def format_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if hasattr(value, "item") and not isinstance(value, str):
        return format_value(value.item())
    return str(value)


class Report:
    """Ordered ``key: value`` document with a title line."""

    def __init__(self, title: str):
        self.title = title
        self.items = []

    def add(self, key: str, value) -> None:
        if isinstance(value, dict):
            for k, v in value.items():
                self.add(f"{key}.{k}", v)
        else:
            self.items.append((key, value))

    def update(self, mapping: dict, prefix: str = "") -> None:
        for k, v in mapping.items():
            self.add(prefix + str(k), v)

    def stamp(self) -> None:
        self.add("timestamp", datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"))

    def render(self) -> str:
        lines = [f"# {self.title}"]
        lines += [f"{k}: {format_value(v)}" for k, v in self.items]
        return "\n".join(lines) + "\n"

    def get(self, key):
        for k, v in self.items:
            if k == key:
                return v
        raise KeyError(key)


def strip_clock(text: str) -> str:
    """Remove the clock-dependent lines from a rendered report."""
    keep = []
    for line in text.splitlines():
        key = line.split(":", 1)[0]
        if key == "timestamp" or key.endswith("wall_time_s"):
            continue
        keep.append(line)
    return "\n".join(keep)


def parse_report(text: str) -> dict:
    """Machine-readable view: ``key -> raw value string`` (title line skipped)."""
    out = {}
    for line in text.splitlines():
        if not line or line.startswith("#") or ": " not in line:
            continue
        k, v = line.split(": ", 1)
        out[k] = v
    return out
