"""Reports, identity checks and deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

SIG_DIGITS = 12

CHECK_MODES = ("exact", "relative", "absolute", "less", "le", "ge", "range", "holds")


def canonical(value: Any) -> Any:
    """Convert a result tree into JSON-ready data with floats rounded to 12 significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else value.numerator
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return repr(v)
        v = float(f"{v:.{SIG_DIGITS}g}")
        return 0.0 if v == 0 else v
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": canonical(value.real), "im": canonical(value.imag)}
    if isinstance(value, np.ndarray):
        return [canonical(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if hasattr(value, "to_dict"):
        return canonical(value.to_dict())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value: Any) -> str:
    return json.dumps(canonical(value), separators=(",", ":"), ensure_ascii=True)


@dataclass
class Check:
    """One named comparison with its tolerance and verdict.

    ``mode`` selects the comparison: ``exact`` (``lhs == rhs``),
    ``relative``/``absolute`` (error within ``tolerance``), ``less``
    (``lhs < tolerance``), ``le``/``ge`` (``lhs`` against ``rhs``),
    ``range`` (``rhs = [lo, hi]``) and ``holds`` (``lhs`` is a boolean).
    """

    name: str
    anchor: str
    lhs: Any
    rhs: Any = None
    tolerance: float = 0.0
    mode: str = "exact"
    detail: str = ""
    passed: bool = field(init=False)
    error: float | None = field(init=False, default=None)

    def __post_init__(self):
        if self.mode not in CHECK_MODES:
            raise ValueError(f"unknown check mode {self.mode!r}")
        self.evaluate()

    def evaluate(self) -> bool:
        m, a, b, tol = self.mode, self.lhs, self.rhs, self.tolerance
        if m == "exact":
            self.passed = a == b
        elif m == "relative":
            denom = max(abs(a), abs(b))
            self.error = abs(a - b) / denom if denom else 0.0
            self.passed = self.error <= tol
        elif m == "absolute":
            self.error = abs(a - b)
            self.passed = self.error <= tol
        elif m == "less":
            self.passed = a < tol
        elif m == "le":
            self.passed = a <= b
        elif m == "ge":
            self.passed = a >= b
        elif m == "range":
            self.passed = b[0] <= a <= b[1]
        else:
            self.passed = bool(a)
        self.passed = bool(self.passed)
        return self.passed

    def with_tolerance(self, tolerance: float) -> "Check":
        return Check(self.name, self.anchor, self.lhs, self.rhs, tolerance, self.mode, self.detail)

    def to_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "mode": self.mode, "lhs": self.lhs,
                "rhs": self.rhs, "tolerance": self.tolerance, "error": self.error,
                "passed": self.passed, "detail": self.detail}

    @classmethod
    def from_identity(cls, ic) -> "Check":
        """Wrap an :class:`cubiclines.expsums.IdentityCheck`."""
        return cls(ic.name, ic.anchor, ic.lhs, ic.rhs, ic.tolerance, "relative")


@dataclass
class Report:
    """Job echo, results and checks.  Timings are kept apart so serialization is reproducible."""

    job: dict
    results: list = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self, timing: bool = False) -> dict:
        out = {"job": self.job, "results": self.results, "checks": [c.to_dict() for c in self.checks],
               "passed": self.passed}
        if timing:
            out["timing"] = self.timing
        return out

    def to_json(self, timing: bool = False) -> str:
        return dumps(self.to_dict(timing))

    def to_jsonl(self, timing: bool = False) -> str:
        lines = [dumps({"kind": "job", **self.job})]
        lines += [dumps({"kind": "result", **_as_dict(r)}) for r in self.results]
        lines += [dumps({"kind": "check", **c.to_dict()}) for c in self.checks]
        lines.append(dumps({"kind": "summary", "passed": self.passed, "checks": len(self.checks),
                            "failures": len(self.failures)}))
        if timing:
            lines.append(dumps({"kind": "timing", **self.timing}))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        """Results and checks as one table with a ``kind`` column; nested values are JSON encoded."""
        rows = [{"kind": "result", **_as_dict(r)} for r in self.results]
        rows += [{"kind": "check", **c.to_dict()} for c in self.checks]
        columns: list[str] = []
        for row in rows:
            for k in row:
                if k not in columns:
                    columns.append(k)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns or ["kind"], lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
        return buf.getvalue()

    def serialize(self, fmt: str = "jsonl", timing: bool = False) -> str:
        if fmt == "jsonl":
            return self.to_jsonl(timing)
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json(timing) + "\n"
        raise ValueError(f"unknown format {fmt!r}")


def _as_dict(r) -> dict:
    if isinstance(r, dict):
        return r
    if hasattr(r, "to_dict"):
        return r.to_dict()
    return {"value": r}


def _cell(v):
    v = canonical(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return v
