"""Exact enumeration engines.

* ``count_lines_bruteforce`` / ``count_lines_mitm``: pairs ``(x, y)`` in the
  symmetric box ``[-X, X]^(2s)`` on which all four cubic forms vanish.
* ``count_pv``: solutions of the two-variable degree-3 translation-dilation
  invariant system over ``[1, X]``.
* ``count_hua_single``: the eight-cube equation
  ``x1^3 + .. + x4^3 = x5^3 + .. + x8^3`` over ``[1, X]``.
* ``count_local``: solutions of the cubic line system modulo ``q``.

Every count is an exact Python integer.  Parallel work is split into disjoint
ranges whose partial counts are added, so results never depend on the number
of workers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._limits import DEFAULT_LIMITS, Limits
from ._parallel import map_ordered, split_range
from .forms import (
    CoefficientVector,
    as_coefficients,
    check_int64_range,
    form_bound,
    veronese_array,
)

# Trailing indices are expanded into one array of at most this many rows;
# the leading indices are looped over.
_TAIL_ROWS = 1 << 20


@dataclass
class CountRecord:
    label: str
    params: dict
    count: int
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {"label": self.label, "params": dict(self.params), "count": int(self.count),
                "wall_time": self.wall_time}


@dataclass(frozen=True)
class HashJoinPlan:
    """Split of the indices ``0 .. s-1`` into a map side ``A`` and a probe side ``B``."""

    A: tuple[int, ...]
    B: tuple[int, ...]
    memory_bytes: int = 0

    def __post_init__(self):
        both = set(self.A) | set(self.B)
        if set(self.A) & set(self.B):
            raise ValueError("plan halves must be disjoint")
        if both != set(range(len(self.A) + len(self.B))):
            raise ValueError("plan halves must cover 0..s-1")


# 4 int64 form values per row plus the composite key and sort workspace
_BYTES_PER_ROW = 8 * 4 + 8 * 3


def plan_split(s: int, X: int) -> HashJoinPlan:
    """Default plan: the first ``ceil(s/2)`` indices build the map."""
    if s < 1:
        raise ValueError("s must be >= 1")
    half = (s + 1) // 2
    rows = (2 * X + 1) ** (2 * half)
    return HashJoinPlan(tuple(range(half)), tuple(range(half, s)), rows * _BYTES_PER_ROW)


def _symmetric_box(X: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(-X, X + 1, dtype=np.int64)
    xs, ys = np.meshgrid(r, r, indexing="ij")
    return xs.ravel(), ys.ravel()


def _positive_box(X: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(1, X + 1, dtype=np.int64)
    xs, ys = np.meshgrid(r, r, indexing="ij")
    return xs.ravel(), ys.ravel()


def _tuple_sums(tables: Sequence[np.ndarray], width: int) -> np.ndarray:
    """All sums ``t_1[i_1] + ... + t_k[i_k]`` in row-major order of ``(i_1, .., i_k)``."""
    acc = np.zeros((1, width), dtype=np.int64)
    for t in tables:
        acc = (acc[:, None, :] + t[None, :, :]).reshape(-1, width)
    return acc


def _line_tables(c: CoefficientVector, X: int) -> list[np.ndarray]:
    xs, ys = _symmetric_box(X)
    nu = veronese_array(3, xs, ys)
    return [ci * nu for ci in c]


def _tail_length(n: int, s: int) -> int:
    m = 1
    while m < s and n ** (m + 1) <= _TAIL_ROWS:
        m += 1
    return m


def count_lines_bruteforce(c, X: int, limits: Limits = DEFAULT_LIMITS, workers: int = 1) -> CountRecord:
    """Count line solutions by checking every tuple of the box.

    The trailing indices are expanded into one array and every leading tuple
    is compared against all of its rows, so each of the ``(2X+1)^(2s)``
    candidates is tested individually.  Serves as the oracle for
    :func:`count_lines_mitm`.
    """
    t0 = time.perf_counter()
    c = as_coefficients(c)
    if X < 0:
        raise ValueError("X must be >= 0")
    s = c.s
    n = (2 * X + 1) ** 2
    limits.check_work(float(n) ** s * 4, "count_lines_bruteforce")
    check_int64_range(form_bound(c, X))
    tables = _line_tables(c, X)
    m = _tail_length(n, s)
    tail = _tuple_sums(tables[s - m:], 4)
    head_tables = tables[: s - m]
    heads = n ** (s - m)

    def work(bounds):
        lo, hi = bounds
        total = 0
        for flat in range(lo, hi):
            hv = np.zeros(4, dtype=np.int64)
            rem = flat
            for t in reversed(head_tables):
                rem, i = divmod(rem, n)
                hv += t[i]
            total += int(np.count_nonzero((tail == -hv).all(axis=1)))
        return total

    count = sum(map_ordered(work, split_range(heads, max(1, workers)), workers))
    return CountRecord("count_lines_bruteforce", {"s": s, "X": X, "c": list(c)}, count,
                       time.perf_counter() - t0)


def _composite_keys(values: np.ndarray, K: int) -> np.ndarray:
    radix = 2 * K + 1
    shifted = values + K
    return ((shifted[:, 3] * radix + shifted[:, 2]) * radix + shifted[:, 1]) * radix + shifted[:, 0]


def count_lines_mitm(c, X: int, plan: HashJoinPlan | None = None, limits: Limits = DEFAULT_LIMITS,
                     workers: int = 1) -> CountRecord:
    """Count line solutions by a hash join on the four form values.

    Form values of every ``A``-half tuple go into a multiset keyed by a
    range-checked composite integer; each ``B``-half tuple looks up the
    negation of its own values.
    """
    t0 = time.perf_counter()
    c = as_coefficients(c)
    if X < 0:
        raise ValueError("X must be >= 0")
    s = c.s
    plan = plan or plan_split(s, X)
    if len(plan.A) + len(plan.B) != s:
        raise ValueError("plan does not match the number of coefficients")
    memory = max(plan.memory_bytes, (2 * X + 1) ** (2 * len(plan.A)) * _BYTES_PER_ROW)
    limits.check_memory(memory, "count_lines_mitm")
    tables = _line_tables(c, X)
    X3 = X**3
    K = max(sum(abs(c[i]) for i in plan.A), sum(abs(c[i]) for i in plan.B)) * X3
    check_int64_range((2 * K + 1) ** 4, "composite key")

    keys_a, mult = np.unique(_composite_keys(_tuple_sums([tables[i] for i in plan.A], 4), K),
                             return_counts=True)
    probe = _tuple_sums([tables[i] for i in plan.B], 4)
    limits.check_work(float(len(probe)) * math.log2(len(keys_a) + 2) + len(keys_a), "count_lines_mitm")

    def work(bounds):
        lo, hi = bounds
        want = _composite_keys(-probe[lo:hi], K)
        idx = np.searchsorted(keys_a, want)
        idx[idx == len(keys_a)] = 0
        hit = keys_a[idx] == want
        return int(mult[idx[hit]].sum(dtype=np.int64))

    chunks = split_range(len(probe), max(1, workers) * 4)
    count = sum(map_ordered(work, chunks, workers))
    return CountRecord("count_lines_mitm", {"s": s, "X": X, "c": list(c), "split": [list(plan.A), list(plan.B)]},
                       count, time.perf_counter() - t0)


def _pv_table(X: int) -> np.ndarray:
    xs, ys = _positive_box(X)
    return np.concatenate([veronese_array(d, xs, ys) for d in (1, 2, 3)], axis=1)


def _multiplicities(rows: np.ndarray) -> np.ndarray:
    """Counts of the distinct rows of a nonnegative-offset int64 matrix."""
    lo = rows.min(axis=0)
    span = rows.max(axis=0) - lo + 1
    if float(np.prod(span.astype(float))) < 2.0**62:
        key = np.zeros(len(rows), dtype=np.int64)
        for k in range(rows.shape[1]):
            key = key * int(span[k]) + (rows[:, k] - lo[k])
        _, counts = np.unique(key, return_counts=True)
    else:
        _, counts = np.unique(rows, axis=0, return_counts=True)
    return counts.astype(np.int64)


def _sum_squares(counts: np.ndarray) -> int:
    if len(counts) == 0:
        return 0
    peak = int(counts.max())
    if peak * peak * len(counts) < 2**62:
        return int(np.dot(counts, counts))
    return sum(int(m) * int(m) for m in counts.tolist())


def count_pv(s: int, X: int, limits: Limits = DEFAULT_LIMITS) -> CountRecord:
    """Solutions in ``[1, X]`` of the nine equations of degrees 1, 2, 3 in two variables.

    Computed as ``sum_v m_v^2`` where ``m_v`` counts the s-tuples of points
    whose summed monomial vector (2 + 3 + 4 components) equals ``v``.
    """
    t0 = time.perf_counter()
    if s < 1 or X < 1:
        raise ValueError("s and X must be >= 1")
    rows = X ** (2 * s)
    limits.check_work(float(rows) * 9 * max(1.0, math.log2(rows)), "count_pv")
    limits.check_memory(float(rows) * 9 * 8 * 3, "count_pv")
    table = _pv_table(X)
    check_int64_range(s * X**3, "degree-3 sums")
    total = _sum_squares(_multiplicities(_tuple_sums([table] * s, 9)))
    return CountRecord("count_pv", {"s": s, "X": X}, total, time.perf_counter() - t0)


def count_pv_direct(s: int, X: int, limits: Limits = DEFAULT_LIMITS) -> CountRecord:
    """Oracle for :func:`count_pv`: compares every pair of s-tuples directly."""
    t0 = time.perf_counter()
    sums = _tuple_sums([_pv_table(X)] * s, 9)
    n = len(sums)
    limits.check_work(float(n) * n * 9, "count_pv_direct")
    total = 0
    step = max(1, (1 << 22) // max(n, 1))
    for lo in range(0, n, step):
        block = sums[lo:lo + step]
        total += int(np.count_nonzero((block[:, None, :] == sums[None, :, :]).all(axis=2)))
    return CountRecord("count_pv_direct", {"s": s, "X": X}, total, time.perf_counter() - t0)


def two_cube_representations(X: int) -> tuple[np.ndarray, np.ndarray]:
    """Sparse ``r_2``: sorted distinct values of ``x^3 + y^3`` over ``[1, X]^2`` and their multiplicities."""
    r = np.arange(1, X + 1, dtype=np.int64) ** 3
    values, mult = np.unique((r[:, None] + r[None, :]).ravel(), return_counts=True)
    return values, mult.astype(np.int64)


def four_cube_representations(X: int, limits: Limits = DEFAULT_LIMITS, workers: int = 1) -> np.ndarray:
    """Dense ``R_4(n)`` for ``0 <= n <= 4 X^3`` by sparse self-convolution of ``r_2``."""
    values, mult = two_cube_representations(X)
    u = len(values)
    length = 2 * int(values[-1]) + 1
    limits.check_work(float(u) * u / 2 + length, "four_cube_representations")
    limits.check_memory(8.0 * length * (1 + max(1, workers)), "four_cube_representations")
    check_int64_range(length)
    w = mult.astype(np.float64)
    rows_per_block = max(1, (1 << 23) // u)

    def work(bounds):
        lo, hi = bounds
        acc = np.zeros(length, dtype=np.float64)
        for a in range(lo, hi, rows_per_block):
            b = min(hi, a + rows_per_block)
            # pairs (i, j) with a <= i < b and j >= i; off-diagonal pairs count twice
            sums = values[a:b, None] + values[None, a:]
            weights = w[a:b, None] * w[None, a:]
            i = np.arange(a, b)[:, None]
            j = np.arange(a, u)[None, :]
            weights = np.where(j > i, 2.0 * weights, np.where(j == i, weights, 0.0))
            base = int(sums.min())
            part = np.bincount((sums - base).ravel(), weights=weights.ravel())
            acc[base:base + len(part)] += part
        return acc

    # row ranges of roughly equal pair counts
    parts = max(1, workers)
    cum = np.cumsum(np.arange(u, 0, -1, dtype=np.float64))
    cuts = [0] + [int(np.searchsorted(cum, cum[-1] * k / parts)) for k in range(1, parts)] + [u]
    bounds = [(cuts[k], cuts[k + 1]) for k in range(parts) if cuts[k] < cuts[k + 1]]
    total = np.zeros(length, dtype=np.int64)
    for part in map_ordered(work, bounds, workers):
        total += np.rint(part).astype(np.int64)
    return total


def count_hua_single(X: int, limits: Limits = DEFAULT_LIMITS, workers: int = 1) -> CountRecord:
    """Solutions of ``x1^3+x2^3+x3^3+x4^3 = x5^3+x6^3+x7^3+x8^3`` with ``1 <= x_i <= X``.

    Equals ``sum_n R_4(n)^2``.  The paired count over ``(x, y)`` with the
    same equation in ``y`` is the square of this number.
    """
    t0 = time.perf_counter()
    if X < 1:
        raise ValueError("X must be >= 1")
    R4 = four_cube_representations(X, limits, workers)
    if int(R4.sum()) != X**4:
        raise ArithmeticError("four-cube representation total does not equal X^4")
    total = _sum_squares(R4)
    return CountRecord("count_hua_single", {"X": X}, total, time.perf_counter() - t0)


def count_hua_direct(X: int, limits: Limits = DEFAULT_LIMITS) -> CountRecord:
    """Oracle for :func:`count_hua_single`: compares all pairs of 4-tuples."""
    t0 = time.perf_counter()
    limits.check_work(float(X) ** 8, "count_hua_direct")
    cubes = (np.arange(1, X + 1, dtype=np.int64) ** 3)[:, None]
    sums = _tuple_sums([cubes] * 4, 1)[:, 0]
    total = 0
    step = max(1, (1 << 22) // len(sums))
    for lo in range(0, len(sums), step):
        total += int(np.count_nonzero(sums[lo:lo + step, None] == sums[None, :]))
    return CountRecord("count_hua_direct", {"X": X}, total, time.perf_counter() - t0)


def count_local(q: int, c, s: int | None = None, limits: Limits = DEFAULT_LIMITS,
                workers: int = 1) -> CountRecord:
    """Number of ``(x, y)`` in ``(Z/q)^(2s)`` satisfying the four congruences modulo ``q``.

    Every residue tuple is tested, as in :func:`count_lines_bruteforce`.
    """
    t0 = time.perf_counter()
    c = as_coefficients(c)
    s = c.s if s is None else s
    if s != c.s:
        raise ValueError(f"s={s} does not match {c.s} coefficients")
    if q < 1:
        raise ValueError("q must be >= 1")
    n = q * q
    limits.check_work(float(n) ** s * 4, "count_local")
    r = np.arange(q, dtype=np.int64)
    xs, ys = np.meshgrid(r, r, indexing="ij")
    nu = veronese_array(3, xs.ravel(), ys.ravel()) % q
    tables = [(ci % q) * nu % q for ci in c]
    m = _tail_length(n, s)
    tail = _tuple_sums(tables[s - m:], 4) % q
    head_tables = tables[: s - m]
    heads = n ** (s - m)

    def work(bounds):
        lo, hi = bounds
        total = 0
        for flat in range(lo, hi):
            hv = np.zeros(4, dtype=np.int64)
            rem = flat
            for t in reversed(head_tables):
                rem, i = divmod(rem, n)
                hv += t[i]
            total += int(np.count_nonzero((tail == (-hv) % q).all(axis=1)))
        return total

    count = sum(map_ordered(work, split_range(heads, max(1, workers)), workers))
    return CountRecord("count_local", {"q": q, "s": s, "c": list(c)}, count, time.perf_counter() - t0)


def fit_exponent(records: Iterable, key: str = "X") -> tuple[float, float]:
    """Least-squares slope and intercept of ``log(count)`` against ``log(X)``.

    ``records`` holds :class:`CountRecord` objects or ``(X, count)`` pairs.
    """
    xs, ys = [], []
    for rec in records:
        if isinstance(rec, CountRecord):
            X, count = rec.params[key], rec.count
        else:
            X, count = rec
        xs.append(float(X))
        ys.append(count)
    if len(xs) < 3:
        raise ValueError("need at least 3 records to fit an exponent")
    if any(y <= 0 for y in ys):
        raise ValueError("all counts must be positive")
    if len(set(xs)) < 2:
        raise ValueError("need at least two distinct X values")
    lx = np.log(np.array(xs))
    ly = np.array([math.log(y) for y in ys])
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)
