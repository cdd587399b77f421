"""Major/minor arc dissections, rational approximation and the two kernels.

Two families of arcs are used:

* the 4-dimensional arcs ``N_delta``: points within ``X^(delta - 3)`` of some
  ``a / q`` with a common denominator ``q <= X^delta`` and
  ``gcd(q, a1, .., a4) = 1``;
* the 1-dimensional arcs ``M(H)``: points of ``[0, 1)`` within
  ``H X^-3 / q`` of some ``a / q`` with ``1 <= a <= q <= H``, ``gcd(q, a) = 1``.

Arcs are closed, so a point on a boundary counts as major.  Every major
verdict carries the rational approximation that proves it.

Exact arithmetic is used whenever the inputs are ints or Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._limits import DEFAULT_LIMITS, Limits
from ._parallel import map_ordered

DELTA = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RationalApprox:
    a: int | tuple[int, ...]
    q: int
    distance: float


@dataclass(frozen=True)
class PruningShell:
    """Shell ``l`` of the dissection of ``M(H)^4 minus M(H/2)^4``.

    Coordinates ``1 .. 4 - l`` lie in ``M(H)``, coordinate ``5 - l`` lies in
    ``M(H)`` but not in ``M(H/2)``, and the last ``l - 1`` lie in ``M(H/2)``.
    """

    H: float
    l: int

    def __post_init__(self):
        if self.l not in (1, 2, 3, 4):
            raise ValueError("shell index must be 1..4")

    @property
    def description(self) -> str:
        tags = ["M(H)"] * (4 - self.l) + ["M(H)\\M(H/2)"] + ["M(H/2)"] * (self.l - 1)
        return " x ".join(tags)

    def contains(self, alpha: Sequence, X) -> bool:
        return in_shell(alpha, self.l, self.H, X)


@dataclass(frozen=True)
class ArcClassification:
    point: tuple
    family: str  # "N" or "M"
    parameter: float  # delta for N, H for M
    X: float
    verdict: str  # "major_N" / "minor_n" or "M" / "m"
    witness: RationalApprox | None = None

    @property
    def is_major(self) -> bool:
        return self.verdict in ("major_N", "M")


def _rational(v):
    if isinstance(v, (int, Fraction, np.integer)):
        return Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v)
    return v


def _exact(*vals) -> bool:
    return all(isinstance(v, (int, Fraction, np.integer)) for v in vals)


def classify_N(alpha: Sequence, delta: float = DELTA, X: float = 2) -> ArcClassification:
    """Decide whether ``alpha`` lies in ``N_delta``.

    For every ``q <= X^delta`` the candidate numerators are the nearest
    integers to ``q alpha_i``; a numerator of 0 is the residue ``q`` (the
    coordinates live on the circle).
    """
    if len(alpha) != 4:
        raise ValueError("alpha needs 4 coordinates")
    if X < 2:
        raise ValueError("X must be >= 2")
    alpha = tuple(_rational(a) % 1 for a in alpha)
    radius = float(X) ** (delta - 3.0)
    qmax = int(math.floor(float(X) ** delta + 1e-12))
    for q in range(1, qmax + 1):
        nums = [int(round(q * a)) for a in alpha]
        dist = max(abs(a - Fraction(n, q)) if isinstance(a, Fraction) else abs(a - n / q)
                   for a, n in zip(alpha, nums))
        nums = tuple(n % q or q for n in nums)
        if math.gcd(q, *nums) != 1:
            continue
        if dist <= radius:
            return ArcClassification(alpha, "N", delta, X, "major_N", RationalApprox(nums, q, float(dist)))
    return ArcClassification(alpha, "N", delta, X, "minor_n", None)


def _m_radius(H, X, q):
    if _exact(H, X):
        return Fraction(H) / (q * Fraction(X) ** 3)
    return float(H) / (q * float(X) ** 3)


def classify_M(alpha, H: float, X: float) -> ArcClassification:
    """Decide whether ``alpha`` lies in ``M(H)``; arcs do not wrap around 0."""
    if X <= 0:
        raise ValueError("X must be positive")
    if float(H) > float(X) ** 1.5 * (1 + 1e-12):
        raise ValueError("H must satisfy H <= X^(3/2)")
    a_ = _rational(alpha)
    if not 0 <= a_ < 1:
        raise ValueError("alpha must lie in [0, 1)")
    for q in range(1, int(math.floor(float(H) + 1e-12)) + 1):
        radius = _m_radius(H, X, q)
        a = min(q, max(1, int(round(q * a_))))
        if math.gcd(q, a) != 1:
            continue
        dist = abs(a_ - Fraction(a, q)) if isinstance(a_, Fraction) else abs(a_ - a / q)
        if dist <= radius:
            return ArcClassification((alpha,), "M", H, X, "M", RationalApprox(a, q, float(dist)))
    return ArcClassification((alpha,), "M", H, X, "m", None)


def in_M(alpha, H, X) -> bool:
    return classify_M(alpha, H, X).is_major


def in_M_power(alpha: Sequence, H_per_coordinate: Sequence, X) -> bool:
    """Membership in the product ``M(H_1) x .. x M(H_4)``."""
    return all(in_M(a, h, X) for a, h in zip(alpha, H_per_coordinate))


def in_shell(alpha: Sequence, l: int, H, X) -> bool:
    """Membership in the pruning shell ``P_l(H)``, straight from its set-difference definition.

    The nested products are ``M(H)^(4 - k) x M(H/2)^k`` for ``k = 0..4``;
    ``P_l`` is the ``(l-1)``-th minus the ``l``-th.
    """
    if l not in (1, 2, 3, 4):
        raise ValueError("shell index must be 1..4")
    half = Fraction(H) / 2 if _exact(H) else float(H) / 2

    def level(k):
        return [H] * (4 - k) + [half] * k

    return in_M_power(alpha, level(l - 1), X) and not in_M_power(alpha, level(l), X)


def shell_of(alpha: Sequence, H, X) -> int | None:
    """Index of the unique shell containing ``alpha``, or None outside ``M(H)^4 minus M(H/2)^4``.

    Computed coordinate-wise: the shell is fixed by the last coordinate
    (scanning from the right) that falls outside ``M(H/2)``.
    """
    if not all(in_M(a, H, X) for a in alpha):
        return None
    half = Fraction(H) / 2 if _exact(H) else float(H) / 2
    for l, a in zip((1, 2, 3, 4), reversed(alpha)):
        if not in_M(a, half, X):
            return l
    return None


def dirichlet_approx(alpha, Q: int) -> RationalApprox:
    """Last continued-fraction convergent ``b / r`` of ``alpha`` with ``r <= Q``.

    Satisfies ``gcd(r, b) = 1`` and ``|alpha - b/r| <= 1 / (r (Q + 1))``.
    Floats are expanded exactly (a float is a dyadic rational).
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    x = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
    p0, q0, p1, q1 = 0, 1, 1, 0
    rest = x
    while True:
        a = math.floor(rest)
        p2, q2 = a * p1 + p0, a * q1 + q0
        if q2 > Q:
            break
        p0, q0, p1, q1 = p1, q1, p2, q2
        frac = rest - a
        if frac == 0:
            break
        rest = 1 / frac
    return RationalApprox(p1, q1, float(abs(x - Fraction(p1, q1))))


def _merge_length(intervals: list) -> object:
    intervals.sort()
    total = 0
    cur_lo, cur_hi = intervals[0]
    for lo, hi in intervals[1:]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        elif hi > cur_hi:
            cur_hi = hi
    return total + (cur_hi - cur_lo)


def measure_M(H, X, limits: Limits = DEFAULT_LIMITS):
    """Lebesgue measure of ``M(H)`` (union of its arcs, clipped to ``[0, 1)``).

    Returns a Fraction when ``H`` and ``X`` are ints/Fractions, else a float.
    """
    qmax = int(math.floor(float(H) + 1e-12))
    if qmax < 1:
        return Fraction(0) if _exact(H, X) else 0.0
    limits.check_work(float(qmax) ** 2, "measure_M")
    exact = _exact(H, X)
    if not exact and qmax > 64:
        return _measure_float(qmax, float(H), float(X))
    intervals = []
    for q in range(1, qmax + 1):
        r = _m_radius(H, X, q)
        for a in range(1, q + 1):
            if math.gcd(q, a) != 1:
                continue
            c = Fraction(a, q) if exact else a / q
            lo, hi = max(c - r, 0), min(c + r, 1)
            if hi > lo:
                intervals.append((lo, hi))
    return _merge_length(intervals) if intervals else (Fraction(0) if exact else 0.0)


def _measure_float(qmax: int, H: float, X: float) -> float:
    los, his = [], []
    for q in range(1, qmax + 1):
        a = np.arange(1, q + 1)
        a = a[np.gcd(a, q) == 1]
        r = H / (q * X**3)
        c = a / q
        los.append(np.maximum(c - r, 0.0))
        his.append(np.minimum(c + r, 1.0))
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    # a new component starts where lo exceeds everything reached before it
    start = np.ones(lo.size, dtype=bool)
    start[1:] = lo[1:] > reach[:-1]
    idx = np.flatnonzero(start)
    ends = np.append(idx[1:] - 1, lo.size - 1)
    return math.fsum((reach[ends] - lo[idx]).tolist())


def cover_bound(H, X):
    """``sum_{q <= H} phi(q) * 2 H X^-3 / q``: total length of all arcs before merging."""
    qmax = int(math.floor(float(H) + 1e-12))
    total = Fraction(0) if _exact(H, X) else 0.0
    for q in range(1, qmax + 1):
        phi = sum(1 for a in range(1, q + 1) if math.gcd(a, q) == 1)
        total += phi * 2 * _m_radius(H, X, q)
    return total


def _geometric(gamma: float, X: int) -> complex:
    """``sum_{y=1}^X e(-gamma y)`` in closed form."""
    r = float(gamma) - round(float(gamma))
    den = math.sin(math.pi * r)
    if abs(den) < 1e-12:
        # r is within rounding of an integer
        return complex(X)
    mod = math.sin(math.pi * r * X) / den
    ph = -math.pi * r * (X + 1)
    return complex(mod * math.cos(ph), mod * math.sin(ph))


def kernel_K(gamma1: float, gamma2: float, X: int) -> complex:
    """``K = sum_{1 <= y1, y2 <= X} e(-gamma1 y1 - gamma2 y2)``, a product of two geometric sums."""
    if X < 1:
        raise ValueError("X must be >= 1")
    return _geometric(gamma1, X) * _geometric(gamma2, X)


def dirichlet_kernel(t: np.ndarray, Y: int) -> np.ndarray:
    """``sum_{|h| <= Y} e(h t) = sin((2Y+1) pi t) / sin(pi t)``, real and even."""
    t = np.asarray(t, dtype=np.float64)
    r = t - np.rint(t)
    den = np.sin(math.pi * r)
    small = np.abs(den) < 1e-12
    safe = np.where(small, 1.0, den)
    out = np.sin((2 * Y + 1) * math.pi * r) / safe
    return np.where(small, float(2 * Y + 1), out)


def _kernel_coefficients(alpha, beta, z1, z2):
    a1, a2, a3, a4 = (float(a) for a in alpha)
    b1, b2, b3 = (float(b) for b in beta)
    return (3 * z1 * a1 + z2 * a2 + b1, 2 * z1 * a2 + 2 * z2 * a3 + b2, z1 * a3 + 3 * z2 * a4 + b3)


def kernel_T(alpha: Sequence[float], beta: Sequence[float], X: int, Y: int,
             limits: Limits = DEFAULT_LIMITS, workers: int = 1) -> float:
    """``T = sum_{1 <= z1, z2 <= X} |sum_{|h_i| <= Y} e(-z1 L1 - z2 L2 - L3)|``.

    The phase is linear in each ``h_i``, so the inner sum is a product of
    three Dirichlet kernels evaluated in closed form.
    """
    if X < 1 or Y < 0:
        raise ValueError("need X >= 1 and Y >= 0")
    limits.check_work(float(X) ** 2 * 30, "kernel_T")
    z2 = np.arange(1, X + 1, dtype=np.float64)

    def row(z1):
        c1, c2, c3 = _kernel_coefficients(alpha, beta, float(z1), z2)
        vals = np.abs(dirichlet_kernel(c1, Y) * dirichlet_kernel(c2, Y) * dirichlet_kernel(c3, Y))
        return math.fsum(vals.tolist())

    return math.fsum(map_ordered(row, range(1, X + 1), workers))


def kernel_T_direct(alpha: Sequence[float], beta: Sequence[float], X: int, Y: int) -> float:
    """Oracle for :func:`kernel_T`: sums every ``h`` in ``[-Y, Y]^3`` explicitly."""
    from .forms import linear_forms

    r = range(-Y, Y + 1)
    total = 0.0
    for z1 in range(1, X + 1):
        for z2 in range(1, X + 1):
            acc = 0j
            for h in ((h1, h2, h3) for h1 in r for h2 in r for h3 in r):
                L1, L2, L3 = linear_forms(h, alpha, beta)
                ph = -z1 * L1 - z2 * L2 - L3
                acc += complex(math.cos(TWO_PI * ph), math.sin(TWO_PI * ph))
            total += abs(acc)
    return total


def minor_arc_decay(X: int = 50, Hs: Sequence[int] = (2, 4, 8, 16), Y: int | None = None,
                    random_samples: int = 64, seed: int = 0, workers: int = 1) -> list[tuple[int, float, int]]:
    """Largest sampled ``T / X^8`` over points whose third coordinate is minor for ``M(H)``.

    Samples combine adversarial points (other phases 0, ``alpha_3`` just outside
    an arc of ``M(H)`` or at a rational with denominator in ``(H, 2H]``) with
    uniformly random phases.  Returns ``(H, sup, number of minor samples)``.
    """
    Y = X if Y is None else Y
    rng = np.random.default_rng(seed)
    rand_alpha = rng.random((random_samples, 4))
    rand_beta = rng.random((random_samples, 3))
    out = []
    for H in Hs:
        cands = []
        for q in range(1, int(H) + 1):
            step = 1.001 * H / (q * float(X) ** 3)
            for a in range(1, q + 1):
                if math.gcd(a, q) == 1:
                    cands += [a / q - step, a / q + step]
        for r in range(int(H) + 1, 2 * int(H) + 1):
            cands += [b / r for b in range(1, r) if math.gcd(b, r) == 1]
        cands = [a3 for a3 in cands if 0 <= a3 < 1 and not in_M(a3, H, X)]
        points = [((0.0, 0.0, a3, 0.0), (0.0, 0.0, 0.0)) for a3 in cands]
        for al, be in zip(rand_alpha, rand_beta):
            if not in_M(float(al[2]), H, X):
                points.append((tuple(al), tuple(be)))
        vals = map_ordered(lambda ab: kernel_T(ab[0], ab[1], X, Y), points, workers)
        out.append((int(H), max(vals) / float(X) ** 8, len(points)))
    return out
