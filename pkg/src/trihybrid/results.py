"""Tabular experiment output with a deterministic CSV encoding."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SCHEMAS = {
    "link": ("arch", "se_bps_hz", "ee_bits_per_joule", "power_W"),
    "aperture-sweep": ("N", "arch", "power_W", "se_bps_hz"),
    "frontier": ("tx_power_w", "arch", "se_bps_hz", "ee_bits_per_joule", "power_W"),
    "dma-map": ("alpha", "phi1", "phi2", "t_abs", "t_arg"),
    "optimize": ("channel_seed", "method", "seed", "objective", "evaluations"),
    "trace": ("step", "temperature", "objective", "accepted"),
}

SORT_KEYS = {
    "link": (),
    "aperture-sweep": ("N",),
    "frontier": ("tx_power_w",),
    "dma-map": ("alpha", "phi1", "phi2"),
    "optimize": ("channel_seed",),
    "trace": ("step",),
}


def format_value(x) -> str:
    """Fixed-point decimal, 9 significant digits; strings and ints pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if not np.isfinite(x):
        return repr(x)
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=9, unique=False, fractional=False, trim="-")


@dataclass
class SweepResult:
    experiment: str
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in SCHEMAS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        n = len(self.columns)
        for r in self.rows:
            if len(r) != n:
                raise ValueError(f"row {r} does not match columns {self.columns}")

    @property
    def columns(self) -> tuple[str, ...]:
        return SCHEMAS[self.experiment]

    def sorted(self) -> "SweepResult":
        """Rows stably sorted by the experiment's key columns."""
        idx = [self.columns.index(k) for k in SORT_KEYS[self.experiment]]
        rows = sorted(self.rows, key=lambda r: tuple(r[i] for i in idx))
        return SweepResult(self.experiment, rows, dict(self.metadata))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self, config_hash: str | None = None) -> str:
        buf = io.StringIO()
        if config_hash:
            buf.write(f"# config_hash: {config_hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()

    def write(self, path, config_hash: str | None = None) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv(config_hash))
        return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)


def trace_table(trace: Sequence) -> SweepResult:
    return SweepResult("trace", [tuple(t) for t in trace])


def write_metadata(path, meta: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
