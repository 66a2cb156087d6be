"""Run configurations, report documents and their text/JSON/CSV renderings.

Rendering is a pure function of the report document, so identical inputs
always give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .replication_maps import (
    SignallingReport,
    closed_form_gap_norm,
    signalling_gap,
)
from .scenario_states import ConstructorConfig, ControlPolicy

FORMATS = ("text", "json", "csv")
CONVENTIONS = ("raw", "normalized", "both")
CSV_COLUMNS = ("s", "p", "c", "policy", "gap_raw", "gap_norm", "gram_defect_max", "verdict")


class UsageError(ValueError):
    """Invalid run parameters; the CLI maps this to a nonzero exit status."""


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise UsageError("grid bounds must be finite")
        if self.step <= 0:
            raise UsageError(f"grid step must be > 0, got {self.step}")
        if self.start > self.stop:
            raise UsageError(f"grid start {self.start} exceeds stop {self.stop}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must look like start:stop:step, got {text!r}")
        try:
            return cls(*(float(x) for x in parts))
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"non-numeric grid {text!r}") from None

    def values(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        # rounding keeps 0.1-style steps from drifting into 0.30000000000000004
        return [round(self.start + k * self.step, 12) for k in range(count)]


@dataclass(frozen=True)
class RunConfig:
    s: float = 0.0
    p: float = 0.0
    c: float = 0.0
    policy: str = "BY_PROGRAM"
    N: int = 2
    m: int = 1
    n: int = 4
    convention: str = "both"
    format: str = "text"
    output_path: str | None = None
    s_grid: GridSpec | None = None
    p_grid: GridSpec | None = None

    def __post_init__(self):
        for name in ("s", "p", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v < 1.0):
                raise UsageError(f"--{name} must lie in [0, 1), got {v}")
        for grid, name in ((self.s_grid, "s"), (self.p_grid, "p")):
            if grid is not None and not all(0.0 <= v < 1.0 for v in grid.values()):
                raise UsageError(f"--{name}-grid values must lie in [0, 1)")
        policy = self.policy.upper().replace("-", "_")
        if policy not in ControlPolicy.__members__:
            raise UsageError(f"unknown policy {self.policy!r}")
        object.__setattr__(self, "policy", policy)
        if self.convention.lower() not in CONVENTIONS:
            raise UsageError(f"unknown convention {self.convention!r}")
        object.__setattr__(self, "convention", self.convention.lower())
        if self.format.lower() not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        object.__setattr__(self, "format", self.format.lower())
        if self.N < 2 or self.m < 1 or self.n < 2 * (self.m + 1):
            raise UsageError(f"need qudit-dim >= 2, m >= 1 and n-blanks >= 2(m+1); "
                             f"got N={self.N}, m={self.m}, n={self.n}")

    def constructor(self, s: float | None = None, p: float | None = None) -> ConstructorConfig:
        return ConstructorConfig.desk(self.s if s is None else s, self.p if p is None else p,
                                      self.c, self.policy, N=self.N, m=self.m, n=self.n)


def _num(x) -> Any:
    """JSON-safe scalar: NaN -> None, complex with zero imaginary part -> float."""
    if x is None:
        return None
    x = complex(x)
    if x.imag != 0:
        return [x.real, x.imag]
    v = x.real
    return None if math.isnan(v) else v


def _eig(rho) -> list[float] | None:
    if rho is None:
        return None
    return [float(v) for v in np.round(rho.eigenvalues()[::-1], 15)]


def report_document(rep: SignallingReport, rc: RunConfig) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "s": _num(rep.s),
        "p": _num(rep.p),
        "c": _num(rep.c),
        "policy": rep.policy,
        "gap_raw": _num(rep.gap_raw),
        "gap_norm": _num(rep.gap_norm),
        "gram_defect_max": _num(rep.gram_defect_max),
        "verdict": rep.verdict.value,
        "tool_version": __version__,
        "N": rc.N,
        "m": rc.m,
        "n": rc.n,
        "blanks_remaining": rep.blanks_remaining,
    }
    if rc.N == 2 and rc.m == 1:
        doc["closed_form_gap_norm"] = _num(closed_form_gap_norm(rep.s, rep.p, rep.c, rep.policy))
    if rc.convention in ("raw", "both"):
        doc["trace_before_raw"] = None if rep.rho_before_raw is None else rep.rho_before_raw.trace.real
        doc["trace_after_raw"] = None if rep.rho_after_raw is None else rep.rho_after_raw.trace.real
        doc["eigenvalues_before_raw"] = _eig(rep.rho_before_raw)
        doc["eigenvalues_after_raw"] = _eig(rep.rho_after_raw)
    if rc.convention in ("normalized", "both"):
        doc["eigenvalues_before_norm"] = _eig(rep.rho_before_norm)
        doc["eigenvalues_after_norm"] = _eig(rep.rho_after_norm)
    return doc


def run_scenario(rc: RunConfig) -> dict[str, Any]:
    return report_document(signalling_gap(rc.constructor()), rc)


def sweep_overlaps(rc: RunConfig) -> list[dict[str, Any]]:
    """Evaluate every (s, p) grid point, s outer and p inner."""
    s_values = rc.s_grid.values() if rc.s_grid else [rc.s]
    p_values = rc.p_grid.values() if rc.p_grid else [rc.p]
    return [report_document(signalling_gap(rc.constructor(s, p)), rc)
            for s in s_values for p in p_values]


def _fmt(v: Any) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.5f}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _text_single(doc: dict[str, Any]) -> str:
    width = max(len(k) for k in doc)
    return "".join(f"{k.ljust(width)}  {_fmt(v)}\n" for k, v in doc.items())


def _text_table(rows: list[dict[str, Any]]) -> str:
    cells = [list(CSV_COLUMNS)] + [[_fmt(r[col]) for col in CSV_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(CSV_COLUMNS))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n"
                   for row in cells)


def _csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(["nan" if r[col] is None else repr(r[col]) if isinstance(r[col], float)
                         else r[col] for col in CSV_COLUMNS])
    return buf.getvalue()


def render_report(report: dict[str, Any] | list[dict[str, Any]], fmt: str) -> str:
    """Render one report document (run) or a list of them (sweep)."""
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}")
    rows = report if isinstance(report, list) else [report]
    if fmt == "json":
        return json.dumps(report, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        return _csv(rows)
    if isinstance(report, list):
        return _text_table(rows)
    return _text_single(report)
