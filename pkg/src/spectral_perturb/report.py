"""Structured verification reports and their serializations."""
from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

SCHEMA = "report-v1"
VERDICTS = ("pass", "fail", "info")


@dataclass
class Check:
    name: str
    anchor: str
    measured: Any
    expected: Any
    verdict: str
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        if not self.anchor:
            raise ValueError("every check needs an anchor")


def check(name, anchor, measured, expected, ok, detail=""):
    """Shorthand: ``ok`` may be a bool (pass/fail) or None (informational)."""
    verdict = "info" if ok is None else ("pass" if ok else "fail")
    return Check(name, anchor, measured, expected, verdict, detail)


@dataclass
class DiagnosticsReport:
    experiment: str
    parameters: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seed: Optional[int] = None
    runtime: float = 0.0
    versions: dict = field(default_factory=dict)

    @property
    def overall(self):
        return "fail" if any(c.verdict == "fail" for c in self.checks) else "pass"

    @property
    def passed(self):
        return self.overall == "pass"

    def add(self, *checks):
        self.checks.extend(checks)
        return self

    def failures(self):
        return [c for c in self.checks if c.verdict == "fail"]

    def extend(self, other: "DiagnosticsReport", prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.anchor, c.measured, c.expected,
                                     c.verdict, c.detail))
        return self

    def to_dict(self, include_runtime=True):
        d = {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "parameters": _plain(self.parameters),
            "seed": self.seed,
            "overall": self.overall,
            "checks": [
                {"name": c.name, "anchor": c.anchor, "measured": _plain(c.measured),
                 "expected": _plain(c.expected), "verdict": c.verdict, "detail": c.detail}
                for c in self.checks
            ],
            "versions": _plain(self.versions),
        }
        if include_runtime:
            d["runtime"] = round(float(self.runtime), 6)
        return d


def software_versions():
    import scipy

    from . import __version__, _kernels

    out = {"spectral_perturb": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
           "python": platform.python_version(), "backend": _kernels.backend()}
    if _kernels.HAVE_NUMBA:
        out["numba"] = _kernels.numba.__version__
    return out


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(x.real), _plain(x.imag)]
    return x


def _cell(x):
    x = _plain(x)
    if isinstance(x, (list, dict)):
        return json.dumps(x, sort_keys=True)
    return "" if x is None else str(x)


def emit_report(report: DiagnosticsReport, fmt="json", include_runtime=True) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(include_runtime), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)  # RFC 4180 line ends, so embedded \r and \n get quoted
        w.writerow(["name", "anchor", "measured", "expected", "verdict", "detail"])
        for c in report.checks:
            w.writerow([c.name, c.anchor, _cell(c.measured), _cell(c.expected), c.verdict, c.detail])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"experiment: {report.experiment}", f"schema: {SCHEMA}",
                 f"seed: {report.seed}", f"overall: {report.overall.upper()}"]
        if include_runtime:
            lines.append(f"runtime: {report.runtime:.3f}s")
        for c in report.checks:
            lines.append(f"[{c.verdict.upper():4}] {c.name}: measured={_cell(c.measured)} "
                         f"expected={_cell(c.expected)} ({c.anchor})")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_report(report, path, fmt="json", include_runtime=True):
    text = emit_report(report, fmt, include_runtime)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text
