"""Job specifications and dispatch to the computational modules."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .. import arcs, counting, expsums, integral
from .._limits import GIB, Limits
from ..forms import CoefficientVector, as_coefficients
from .report import Check, Report


class JobError(ValueError):
    """A job parameter violates a precondition of the operation it targets."""


# ---------------------------------------------------------------- converters

def parse_coefficients(v) -> CoefficientVector:
    try:
        return as_coefficients(v)
    except ValueError as exc:
        raise JobError(f"coefficients: {exc}") from None


def parse_floats(v) -> tuple[float, ...]:
    if isinstance(v, str):
        return tuple(float(p) for p in v.replace(" ", "").split(",") if p)
    if isinstance(v, (int, float)):
        return (float(v),)
    return tuple(float(p) for p in v)


def parse_ints(v) -> tuple[int, ...]:
    if isinstance(v, str):
        return tuple(int(p) for p in v.replace(" ", "").split(",") if p)
    if isinstance(v, int):
        return (v,)
    return tuple(int(p) for p in v)


def parse_grid(v) -> list[int]:
    """An integer, a list, ``"a,b,c"`` or a geometric range ``"start:stop:factor"``."""
    if isinstance(v, int):
        return [v]
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    text = str(v).replace(" ", "")
    if ":" not in text:
        return list(parse_ints(text))
    parts = text.split(":")
    if len(parts) != 3:
        raise JobError(f"grid {text!r} must look like start:stop:factor")
    start, stop, factor = int(parts[0]), int(parts[1]), float(parts[2])
    if start < 1 or factor <= 1:
        raise JobError("grid needs start >= 1 and factor > 1")
    out, x = [], float(start)
    while round(x) <= stop:
        if not out or round(x) != out[-1]:
            out.append(int(round(x)))
        x *= factor
    return out


def parse_points(v) -> list[tuple[float, int]]:
    """``"X:count,X:count,..."`` pairs for exponent fitting."""
    if isinstance(v, str):
        pairs = [p.split(":") for p in v.replace(" ", "").split(",") if p]
        return [(float(a), int(b)) for a, b in pairs]
    return [(float(a), int(b)) for a, b in v]


def _number(v):
    """Int or Fraction when the text is exact, else float."""
    if isinstance(v, (int, float)):
        return v
    text = str(v).strip()
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        from fractions import Fraction
        return Fraction(text)
    return float(text)


REQUIRED = object()


@dataclass(frozen=True)
class Param:
    convert: Callable
    default: Any = REQUIRED
    help: str = ""


@dataclass(frozen=True)
class Command:
    name: str
    handler: Callable
    params: dict
    help: str
    estimate: Callable | None = None


COMMANDS: dict[str, Command] = {}
ALIASES = {"pv-count": "count-pv", "lines-count": "count-lines"}


def command(name: str, help: str, params: dict, estimate: Callable | None = None):
    def deco(fn):
        COMMANDS[name] = Command(name, fn, params, help, estimate)
        return fn
    return deco


# ---------------------------------------------------------------- job spec

@dataclass
class JobSpec:
    """A subcommand with its parameters, budgets, worker count and output settings."""

    command: str
    params: dict = field(default_factory=dict)
    workers: int = 1
    work_limit: float = 1e10
    memory_limit: float = 8 * GIB
    output: str | None = None
    format: str = "jsonl"
    seed: int = 0

    def __post_init__(self):
        self.command = ALIASES.get(self.command, self.command)

    @property
    def limits(self) -> Limits:
        return Limits(float(self.work_limit), float(self.memory_limit))

    def resolved(self) -> dict:
        """Parameters converted and completed with defaults; raises :class:`JobError`."""
        if self.command not in COMMANDS:
            raise JobError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise JobError("workers must be >= 1")
        if self.format not in ("jsonl", "csv", "json"):
            raise JobError(f"unknown format {self.format!r}")
        spec = COMMANDS[self.command].params
        unknown = set(self.params) - set(spec)
        if unknown:
            raise JobError(f"{self.command}: unknown parameters {sorted(unknown)}")
        out = {}
        for key, p in spec.items():
            raw = self.params.get(key)
            if raw is None:
                if p.default is REQUIRED:
                    raise JobError(f"{self.command}: parameter {key!r} is required")
                out[key] = p.default
                continue
            try:
                out[key] = p.convert(raw)
            except (TypeError, ValueError) as exc:
                raise JobError(f"{self.command}: bad value for {key!r}: {exc}") from None
        return out

    def echo(self) -> dict:
        return {"command": self.command, "params": self.resolved(), "workers": self.workers,
                "work_limit": self.work_limit, "memory_limit": self.memory_limit}


def _echo(job: JobSpec, params: dict) -> dict:
    # worker count is excluded: results must not depend on it
    return {"command": job.command, "params": {k: _plain(v) for k, v in params.items()}, "seed": job.seed,
            "work_limit": float(job.work_limit), "memory_limit": float(job.memory_limit)}


def _plain(v):
    if isinstance(v, CoefficientVector):
        return list(v.entries)
    if isinstance(v, tuple):
        return list(v)
    return v


def run(job: JobSpec, dry_run: bool = False) -> Report:
    """Validate ``job``, dispatch it and collect results and checks into a :class:`Report`."""
    params = job.resolved()
    cmd = COMMANDS[job.command]
    report = Report(_echo(job, params))
    if cmd.estimate is not None:
        est = float(cmd.estimate(**params))
        report.timing["work_estimate"] = est
        if dry_run:
            report.results.append({"work_estimate": est, "work_limit": float(job.work_limit),
                                   "within_budget": est <= job.work_limit})
            return report
        job.limits.check_work(est, job.command)
    elif dry_run:
        report.results.append({"work_estimate": None, "work_limit": float(job.work_limit),
                               "within_budget": True})
        return report
    t0 = time.perf_counter()
    ctx = _Context(job.limits, job.workers, job.seed)
    results, checks = cmd.handler(ctx, **params)
    report.timing["wall_time"] = time.perf_counter() - t0
    for r in results:
        if isinstance(r, dict) and "wall_time" in r:
            report.timing.setdefault("parts", []).append(r.pop("wall_time"))
        report.results.append(r)
    report.checks.extend(checks)
    return report


@dataclass(frozen=True)
class _Context:
    limits: Limits
    workers: int
    seed: int


def _record(rec: counting.CountRecord) -> dict:
    d = rec.to_dict()
    return {"label": d["label"], **d["params"], "count": d["count"], "wall_time": d["wall_time"]}


# ---------------------------------------------------------------- counting

def _lines_estimate(c, X, method):
    s = c.s
    half = (s + 1) // 2 if method == "mitm" else s
    return max((2 * x + 1) ** (2 * half) * 4 for x in X)


@command("count-lines", "count rational line solutions in the box [-X, X]^(2s)",
         {"c": Param(parse_coefficients, help="coefficients, e.g. 1,-1"),
          "X": Param(parse_grid, help="box size, list or start:stop:factor"),
          "method": Param(str, "mitm", "mitm or bruteforce")},
         _lines_estimate)
def _count_lines(ctx, c, X, method):
    fn = {"mitm": counting.count_lines_mitm, "bruteforce": counting.count_lines_bruteforce}.get(method)
    if fn is None:
        raise JobError(f"count-lines: unknown method {method!r}")
    return [_record(fn(c, x, limits=ctx.limits, workers=ctx.workers)) for x in X], []


@command("count-pv", "solutions of the degree-3 two-variable translation-dilation invariant system",
         {"s": Param(int), "X": Param(parse_grid), "method": Param(str, "table", "table or direct")},
         lambda s, X, method: max(float(x) ** (2 * s) * (1 if method == "table" else float(x) ** (2 * s))
                                  for x in X))
def _count_pv(ctx, s, X, method):
    if s < 1:
        raise JobError("count-pv: s must be >= 1")
    fn = {"table": counting.count_pv, "direct": counting.count_pv_direct}.get(method)
    if fn is None:
        raise JobError(f"count-pv: unknown method {method!r}")
    return [_record(fn(s, x, limits=ctx.limits)) for x in X], []


@command("count-hua", "solutions of x1^3+..+x4^3 = x5^3+..+x8^3 with 1 <= x_i <= X",
         {"X": Param(parse_grid), "method": Param(str, "convolution", "convolution or direct")},
         lambda X, method: max(float(x) ** 4 for x in X))
def _count_hua(ctx, X, method):
    if method == "convolution":
        recs = [counting.count_hua_single(x, limits=ctx.limits, workers=ctx.workers) for x in X]
    elif method == "direct":
        recs = [counting.count_hua_direct(x, limits=ctx.limits) for x in X]
    else:
        raise JobError(f"count-hua: unknown method {method!r}")
    return [_record(r) for r in recs], []


@command("count-local", "solutions of the line system modulo q",
         {"q": Param(int), "c": Param(parse_coefficients)},
         lambda q, c: float(q) ** (2 * c.s) * 4)
def _count_local(ctx, q, c):
    if q < 1:
        raise JobError("count-local: q must be >= 1")
    return [_record(counting.count_local(q, c, limits=ctx.limits, workers=ctx.workers))], []


@command("fit-exponent", "log-log slope of a count over an X grid (or of given X:count points)",
         {"target": Param(str, "hua", "hua, pv or lines"), "X": Param(parse_grid, None),
          "s": Param(int, 1), "c": Param(parse_coefficients, None),
          "points": Param(parse_points, None, "X:count pairs; skips counting")})
def _fit_exponent(ctx, target, X, s, c, points):
    rows = []
    if points is None:
        if not X:
            raise JobError("fit-exponent: give X or points")
        for x in X:
            if target == "hua":
                rec = counting.count_hua_single(x, limits=ctx.limits, workers=ctx.workers)
            elif target == "pv":
                rec = counting.count_pv(s, x, limits=ctx.limits)
            elif target == "lines":
                if c is None:
                    raise JobError("fit-exponent: target lines needs c")
                rec = counting.count_lines_mitm(c, x, limits=ctx.limits, workers=ctx.workers)
            else:
                raise JobError(f"fit-exponent: unknown target {target!r}")
            rows.append(_record(rec))
        points = [(r["X"], r["count"]) for r in rows]
    slope, intercept = counting.fit_exponent(points)
    rows.append({"label": "fit", "target": target, "slope": slope, "intercept": intercept,
                 "points": len(points)})
    return rows, []


# ---------------------------------------------------------------- exponential sums

@command("exp-sum", "cubic Weyl sum F(alpha) over 1 <= x, y <= X (or |x|, |y| <= X)",
         {"alpha": Param(parse_floats), "X": Param(int), "box": Param(str, "positive"),
          "c": Param(int, 1)},
         lambda alpha, X, box, c: float(2 * X + 1) ** 2)
def _exp_sum(ctx, alpha, X, box, c):
    if len(alpha) != 4:
        raise JobError("exp-sum: alpha needs 4 coordinates")
    v = expsums.weyl_sum_F(alpha, X, box, c)
    return [{"alpha": list(alpha), "X": X, "box": box, "c": c, "value": v, "abs": abs(v)}], []


@command("complete-sum", "complete sum S(q, a) over (x, y) mod q",
         {"q": Param(int), "a": Param(parse_ints), "method": Param(str, "fast", "fast or direct")},
         lambda q, a, method: float(q) ** 2)
def _complete_sum(ctx, q, a, method):
    if q < 1 or len(a) != 4:
        raise JobError("complete-sum: need q >= 1 and 4 integers a")
    fn = expsums.complete_sum if method == "fast" else expsums.complete_sum_direct
    return [{"q": q, "a": list(a), "value": fn(q, a)}], []


@command("local-average", "normalized local average S(q)",
         {"q": Param(int), "c": Param(parse_coefficients)},
         lambda q, c: float(q) ** 4 * (4 * math.log2(max(q, 2)) + c.s))
def _local_average(ctx, q, c):
    return [{"q": q, "c": list(c), "S": expsums.local_average(q, c, limits=ctx.limits)}], []


@command("singular-series", "truncated Euler product of local densities",
         {"c": Param(parse_coefficients), "P_max": Param(int, 13), "h_max": Param(int, None)},
         lambda c, P_max, h_max: sum(float(p) ** (4 * (h_max or expsums.default_depth(p)))
                                     for p in expsums.primes_upto(P_max)) * (8 + c.s))
def _singular_series(ctx, c, P_max, h_max):
    ss = expsums.singular_series(c, P_max=P_max, h_max=h_max, limits=ctx.limits)
    rows = []
    for f in ss.factors:
        rows.extend(f.to_rows())
    rows.append({"label": "product", "value": ss.value, "stability": ss.stability,
                 "nonpositive": ss.nonpositive})
    checks = [Check(f"factor p={f.p} positive", "local factor positivity", f.partial_factor, 0.0, 0.0, "ge")
              for f in ss.factors]
    return rows, checks


@command("local-identity", "compare summed local averages with the congruence count",
         {"p": Param(int), "h": Param(int), "c": Param(parse_coefficients),
          "tolerance": Param(float, 1e-6)},
         lambda p, h, c, tolerance: float(p) ** (2 * h * c.s) * 4)
def _local_identity(ctx, p, h, c, tolerance):
    ic = expsums.local_identity_check(p, h, c, tolerance=tolerance, limits=ctx.limits, workers=ctx.workers)
    return [{"p": p, "h": h, "c": list(c), "lhs": ic.lhs, "rhs": ic.rhs}], [Check.from_identity(ic)]


# ---------------------------------------------------------------- integrals

@command("u-eval", "oscillatory integral u(gamma) over [-1, 1]^2",
         {"gamma": Param(parse_floats), "tol": Param(float, 1e-10)})
def _u_eval(ctx, gamma, tol):
    if len(gamma) != 4:
        raise JobError("u-eval: gamma needs 4 coordinates")
    return [{"gamma": list(gamma), "value": integral.u_eval(gamma, tol, ctx.limits)}], []


@command("v-eval", "v(gamma; P) via the scaling identity, with the direct integral as a check",
         {"gamma": Param(parse_floats), "P": Param(float), "tol": Param(float, 1e-10),
          "check": Param(lambda v: str(v).lower() in ("1", "true", "yes"), False, "also integrate directly")})
def _v_eval(ctx, gamma, P, tol, check):
    if len(gamma) != 4:
        raise JobError("v-eval: gamma needs 4 coordinates")
    v = integral.v_eval(gamma, P, tol, ctx.limits)
    row = {"gamma": list(gamma), "P": P, "value": v}
    checks = []
    if check:
        d = integral.v_direct(gamma, P, tol, ctx.limits)
        row["direct"] = d
        checks.append(Check("v scaling", "v(gamma;P) = P^2 u(P^3 gamma)", v.real, d.real, 1e-6, "absolute"))
    return [row], checks


@command("singular-integral-mc", "Monte Carlo slab estimate of the singular integral",
         {"c": Param(parse_coefficients), "sigma": Param(float, 0.05), "n": Param(lambda v: int(float(v)), 10**6),
          "compare_half": Param(lambda v: str(v).lower() in ("1", "true", "yes"), False)},
         lambda c, sigma, n, compare_half: float(n) * c.s * 20)
def _singular_integral_mc(ctx, c, sigma, n, compare_half):
    seed = ctx.seed
    if compare_half:
        full, half, rel = integral.sigma_check(c, sigma=sigma, n=n, seed=seed, workers=ctx.workers)
        rows = [full.to_dict(), half.to_dict(), {"label": "sigma_agreement", "relative_difference": rel}]
        return rows, []
    return [integral.singular_integral_mc(c, sigma=sigma, n=n, seed=seed, workers=ctx.workers).to_dict()], []


@command("singular-integral-quad", "tensor-grid quadrature of the singular integral over [-R, R]^4",
         {"c": Param(parse_coefficients), "R": Param(float, 2.0), "grid": Param(int, 41)})
def _singular_integral_quad(ctx, c, R, grid):
    return [{"c": list(c), "R": R, "grid": grid,
             "value": integral.singular_integral_quad(c, R=R, grid=grid, limits=ctx.limits)}], []


# ---------------------------------------------------------------- arcs

@command("classify-arc", "major/minor verdict with its witness",
         {"family": Param(str, "N", "N (4-dimensional) or M (one coordinate)"),
          "alpha": Param(lambda v: tuple(_number(p) for p in (v.split(",") if isinstance(v, str) else v))),
          "X": Param(_number), "delta": Param(float, arcs.DELTA), "H": Param(_number, None)})
def _classify_arc(ctx, family, alpha, X, delta, H):
    if family == "N":
        res = [arcs.classify_N(alpha, delta, X)]
    elif family == "M":
        if H is None:
            raise JobError("classify-arc: family M needs H")
        res = [arcs.classify_M(a, H, X) for a in alpha]
    else:
        raise JobError(f"classify-arc: unknown family {family!r}")
    rows = []
    for r in res:
        w = r.witness
        rows.append({"point": [str(p) if not isinstance(p, float) else p for p in r.point],
                     "family": r.family, "parameter": r.parameter, "X": r.X, "verdict": r.verdict,
                     "witness_q": w.q if w else None, "witness_a": (list(w.a) if isinstance(w.a, tuple) else w.a) if w else None,
                     "witness_distance": w.distance if w else None})
    return rows, []


@command("measure-arcs", "exact measure of M(H) against the factor-2 cover bound",
         {"H": Param(lambda v: [_number(p) for p in (str(v).split(",") if not isinstance(v, (list, tuple)) else v)]),
          "X": Param(_number)},
         lambda H, X: max(float(h) for h in H) ** 2)
def _measure_arcs(ctx, H, X):
    rows, checks = [], []
    for h in H:
        m = arcs.measure_M(h, X, ctx.limits)
        bound = 2 * h * h / X**3 if isinstance(m, float) else 2 * arcs.Fraction(h) ** 2 / arcs.Fraction(X) ** 3
        rows.append({"H": h, "X": X, "measure": m, "measure_float": float(m), "bound_2H2X-3": bound,
                     "cover": arcs.cover_bound(h, X), "exceeds_H2X-3": float(m) > float(h) ** 2 / float(X) ** 3})
        checks.append(Check(f"measure H={h} X={X}", "arc measure bound", m, bound, 0.0, "le"))
    return rows, checks


@command("kernel-k", "geometric kernel K(gamma1, gamma2) over 1 <= y1, y2 <= X",
         {"gamma1": Param(float), "gamma2": Param(float), "X": Param(int)})
def _kernel_k(ctx, gamma1, gamma2, X):
    v = arcs.kernel_K(gamma1, gamma2, X)
    return [{"gamma1": gamma1, "gamma2": gamma2, "X": X, "value": v, "abs": abs(v)}], []


@command("kernel-t", "shifted-variable kernel T(alpha, beta; X, Y) via Dirichlet kernels",
         {"alpha": Param(parse_floats), "beta": Param(parse_floats), "X": Param(int), "Y": Param(int),
          "check": Param(lambda v: str(v).lower() in ("1", "true", "yes"), False, "compare with direct summation")},
         lambda alpha, beta, X, Y, check: float(X) ** 2 * (30 + (2 * Y + 1) ** 3 * 20 * bool(check)))
def _kernel_t(ctx, alpha, beta, X, Y, check):
    if len(alpha) != 4 or len(beta) != 3:
        raise JobError("kernel-t: alpha needs 4 and beta 3 coordinates")
    v = arcs.kernel_T(alpha, beta, X, Y, ctx.limits, ctx.workers)
    row = {"alpha": list(alpha), "beta": list(beta), "X": X, "Y": Y, "value": v}
    checks = []
    if check:
        d = arcs.kernel_T_direct(alpha, beta, X, Y)
        row["direct"] = d
        checks.append(Check("kernel T factorization", "factorized vs direct h-sum", v, d, 1e-9, "absolute"))
    return [row], checks
