"""Weyl sums, complete sums modulo q, local averages and the singular series.

Notation: ``e(t) = exp(2 pi i t)`` and ``Phi_a(x, y) = a1 x^3 + a2 x^2 y + a3 x y^2 + a4 y^3``.

The condition ``(q, a) = 1`` on a vector ``a`` is read as
``gcd(q, a1, a2, a3, a4) = 1``.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._limits import DEFAULT_LIMITS, Limits
from .forms import CoefficientVector, as_coefficients, veronese_array

TWO_PI = 2.0 * math.pi
# |imag| above this fraction of the summed magnitudes signals a bug
IMAG_TOL = 1e-9


class ImaginaryResidue(ArithmeticError):
    """A quantity that must be real came out with a non-negligible imaginary part."""


def _frac(t):
    return np.mod(t, 1.0)


def _e(t) -> np.ndarray:
    return np.exp(1j * TWO_PI * _frac(t))


def _fsum_complex(z: np.ndarray) -> complex:
    z = np.asarray(z).ravel()
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


@dataclass(frozen=True)
class PhasePoint:
    """Phase coordinates reduced to ``[0, 1)``."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...] | None = None
    theta: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.alpha) != 4:
            raise ValueError("alpha needs 4 coordinates")
        object.__setattr__(self, "alpha", tuple(float(a) % 1.0 for a in self.alpha))
        if self.beta is not None:
            if len(self.beta) != 3:
                raise ValueError("beta needs 3 coordinates")
            object.__setattr__(self, "beta", tuple(float(b) % 1.0 for b in self.beta))
        if self.theta is not None:
            if len(self.theta) != 2:
                raise ValueError("theta needs 2 coordinates")
            object.__setattr__(self, "theta", tuple(float(t) % 1.0 for t in self.theta))


def _grid(X: int, box: str) -> tuple[np.ndarray, np.ndarray]:
    if X < 1:
        raise ValueError("X must be >= 1")
    if box == "positive":
        r = np.arange(1, X + 1, dtype=np.int64)
    elif box == "symmetric":
        r = np.arange(-X, X + 1, dtype=np.int64)
    else:
        raise ValueError(f"unknown range {box!r}")
    xs, ys = np.meshgrid(r, r, indexing="ij")
    return xs.ravel(), ys.ravel()


def _phase(coeffs: Sequence[float], monomials: np.ndarray) -> np.ndarray:
    """``sum_l coeffs_l * monomials[..., l]`` reduced mod 1 term by term."""
    total = np.zeros(monomials.shape[:-1])
    for l, a in enumerate(coeffs):
        a = float(a) % 1.0
        if a:
            total += _frac(a * monomials[..., l].astype(np.float64))
    return total


def weyl_sum_F(alpha: Sequence[float], X: int, box: str = "positive", c: int = 1) -> complex:
    """``sum e(c (a1 x^3 + a2 x^2 y + a3 x y^2 + a4 y^3))`` over the box.

    ``box="positive"`` sums over ``1 <= x, y <= X``; ``"symmetric"`` over
    ``|x|, |y| <= X``.  ``c`` scales every phase.
    """
    xs, ys = _grid(X, box)
    coeffs = [c * float(a) for a in alpha]
    return _fsum_complex(_e(_phase(coeffs, veronese_array(3, xs, ys))))


def weyl_sum_F_batch(alphas: np.ndarray, X: int, box: str = "positive", c: int = 1) -> np.ndarray:
    """:func:`weyl_sum_F` at many points; ``alphas`` has shape ``(n, 4)``."""
    xs, ys = _grid(X, box)
    nu = veronese_array(3, xs, ys).astype(np.float64)
    alphas = np.mod(np.asarray(alphas, dtype=np.float64) * c, 1.0)
    out = np.empty(len(alphas), dtype=np.complex128)
    step = max(1, (1 << 22) // len(xs))
    for lo in range(0, len(alphas), step):
        block = alphas[lo:lo + step]
        ph = np.zeros((len(block), len(xs)))
        for l in range(4):
            ph += _frac(block[:, l:l + 1] * nu[None, :, l])
        out[lo:lo + step] = np.exp(1j * TWO_PI * ph).sum(axis=1)
    return out


def weyl_sum_full(alpha: Sequence[float], beta: Sequence[float], theta: Sequence[float], X: int) -> complex:
    """Nine-phase sum over ``1 <= x, y <= X`` with degree 3, 2 and 1 monomials."""
    xs, ys = _grid(X, "positive")
    ph = (_phase(alpha, veronese_array(3, xs, ys)) + _phase(beta, veronese_array(2, xs, ys))
          + _phase(theta, veronese_array(1, xs, ys)))
    return _fsum_complex(_e(ph))


def _form_mod(q: int, a: Sequence[int], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    nu = veronese_array(3, xs % q, ys % q) % q
    out = np.zeros(len(xs), dtype=np.int64)
    for l in range(4):
        out = (out + (int(a[l]) % q) * nu[:, l]) % q
    return out


def _roots_of_unity(q: int) -> np.ndarray:
    return np.exp(1j * TWO_PI * np.arange(q) / q)


def complete_sum(q: int, a: Sequence[int]) -> complex:
    """``S(q, a) = sum_{x, y mod q} e(Phi_a(x, y) / q)``.

    Counts how often ``Phi_a`` hits each residue, then makes one pass over
    the ``q``-th roots of unity.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if len(a) != 4:
        raise ValueError("a needs 4 residues")
    r = np.arange(q, dtype=np.int64)
    xs, ys = np.meshgrid(r, r, indexing="ij")
    counts = np.bincount(_form_mod(q, a, xs.ravel(), ys.ravel()), minlength=q)
    return _fsum_complex(counts * _roots_of_unity(q))


def complete_sum_direct(q: int, a: Sequence[int]) -> complex:
    """Oracle: ``q^2`` complex additions with exact rational phases."""
    total = 0j
    for x in range(1, q + 1):
        for y in range(1, q + 1):
            m = (a[0] * x**3 + a[1] * x * x * y + a[2] * x * y * y + a[3] * y**3) % q
            total += complex(math.cos(TWO_PI * m / q), math.sin(TWO_PI * m / q))
    return total


@dataclass
class CompleteSumTable:
    """``S(q, a)`` for every ``a`` in ``(Z/q)^4``, indexed ``values[a1, a2, a3, a4]``."""

    q: int
    values: np.ndarray
    method: str = "transform"

    def __getitem__(self, a) -> complex:
        return complex(self.values[tuple(int(v) % self.q for v in a)])

    def scaled(self, c: int) -> np.ndarray:
        """Array ``T[a] = S(q, c a mod q)``."""
        perm = (int(c) % self.q) * np.arange(self.q) % self.q
        return self.values[np.ix_(perm, perm, perm, perm)]


def veronese_measure(q: int) -> np.ndarray:
    """Counts of ``nu_3(x, y) mod q`` over ``(x, y) in (Z/q)^2`` as a ``q^4`` array."""
    r = np.arange(q, dtype=np.int64)
    xs, ys = np.meshgrid(r, r, indexing="ij")
    nu = veronese_array(3, xs.ravel(), ys.ravel()) % q
    flat = ((nu[:, 0] * q + nu[:, 1]) * q + nu[:, 2]) * q + nu[:, 3]
    return np.bincount(flat, minlength=q**4).reshape(q, q, q, q).astype(np.float64)


def complete_sum_table(q: int, limits: Limits = DEFAULT_LIMITS, method: str = "transform") -> CompleteSumTable:
    """All ``S(q, a)`` at once.

    ``method="transform"`` (default) transforms the image measure of
    ``nu_3`` one axis at a time: ``S(q, a) = sum_m mu(m) e(a.m / q)``.
    ``method="multiplicity"`` calls :func:`complete_sum` for every ``a``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if method == "transform":
        limits.check_work(float(q) ** 4 * (4 * math.log2(q + 1) + 1), "complete_sum_table")
        limits.check_memory(16.0 * q**4 * 3, "complete_sum_table")
        mu = veronese_measure(q)
        # numpy's inverse transform uses e(+a.m/q) and divides by q^4
        values = np.fft.ifftn(mu) * float(q) ** 4
    elif method == "multiplicity":
        limits.check_work(float(q) ** 6, "complete_sum_table")
        values = np.empty((q,) * 4, dtype=np.complex128)
        for a in np.ndindex(*(q,) * 4):
            values[a] = complete_sum(q, a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CompleteSumTable(q, values, method)


def content_mask(q: int) -> np.ndarray:
    """Boolean ``q^4`` array, True where ``gcd(q, a1, a2, a3, a4) = 1``."""
    r = np.arange(q, dtype=np.int64)
    g = np.gcd(r, q)
    g = np.gcd(np.gcd(g[:, None, None, None], g[None, :, None, None]),
               np.gcd(g[None, None, :, None], g[None, None, None, :]))
    return g == 1


def _product_over_coefficients(table: CompleteSumTable, c: CoefficientVector) -> np.ndarray:
    q = table.q
    inv = 1.0 / float(q * q)
    prod = np.ones((q,) * 4, dtype=np.complex128)
    exponents: dict[int, int] = {}
    for cj in c:
        exponents[cj % q] = exponents.get(cj % q, 0) + 1
    for cj in sorted(exponents):
        prod *= (table.scaled(cj) * inv) ** exponents[cj]
    return prod


def local_average(q: int, c, s: int | None = None, table: CompleteSumTable | None = None,
                  limits: Limits = DEFAULT_LIMITS) -> float:
    """``S(q) = sum_{a mod q, (q, a) = 1} prod_j q^-2 S(q, c_j a)``.

    The value is real; a residual imaginary part above rounding level raises
    :class:`ImaginaryResidue`.
    """
    c = as_coefficients(c)
    s = c.s if s is None else s
    if s != c.s:
        raise ValueError(f"s={s} does not match {c.s} coefficients")
    if q == 1:
        return 1.0
    table = table or complete_sum_table(q, limits)
    terms = _product_over_coefficients(table, c)[content_mask(q)]
    total = terms.sum()
    scale = float(np.abs(terms).sum())
    if abs(total.imag) > IMAG_TOL * max(scale, 1e-300) + 1e-300:
        raise ImaginaryResidue(f"S({q}) has imaginary part {total.imag:.3e} (scale {scale:.3e})")
    return float(total.real)


def default_depth(p: int) -> int:
    return 2 if p <= 7 else 1


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for k in range(2, math.isqrt(n) + 1):
        if sieve[k]:
            sieve[k * k::k] = False
    return [int(p) for p in np.flatnonzero(sieve)]


@dataclass
class LocalFactorTable:
    """``S(p^h)`` for ``0 <= h <= h_max`` and the partial Euler factor ``sum_h S(p^h)``."""

    p: int
    h_max: int
    S_values: list[float]
    partial_factor: float

    def to_rows(self) -> list[dict]:
        return [{"p": self.p, "h": h, "S": v, "partial_factor": self.partial_factor}
                for h, v in enumerate(self.S_values)]


def local_factor(p: int, h_max: int, c, s: int | None = None, limits: Limits = DEFAULT_LIMITS) -> LocalFactorTable:
    c = as_coefficients(c)
    values = [1.0] + [local_average(p**h, c, s, limits=limits) for h in range(1, h_max + 1)]
    return LocalFactorTable(p, h_max, values, math.fsum(values))


@dataclass
class SingularSeries:
    value: float
    factors: list[LocalFactorTable]
    stability: float
    nonpositive: list[int] = field(default_factory=list)


class LocalObstructionWarning(RuntimeWarning):
    pass


def singular_series(c, s: int | None = None, P_max: int = 13, h_max=None,
                    limits: Limits = DEFAULT_LIMITS) -> SingularSeries:
    """Truncated Euler product ``prod_{p <= P_max} (1 + sum_{h <= h_max(p)} S(p^h))``.

    ``h_max`` may be an int or a callable of ``p``; by default depth 2 for
    ``p <= 7`` and 1 otherwise.  ``stability`` is the relative change caused
    by the last prime.  Nonpositive factors are listed in ``nonpositive`` and
    reported with a warning.
    """
    c = as_coefficients(c)
    depth = default_depth if h_max is None else (h_max if callable(h_max) else (lambda p: int(h_max)))
    factors = [local_factor(p, depth(p), c, s, limits) for p in primes_upto(P_max)]
    value, previous = 1.0, 1.0
    for f in factors:
        previous = value
        value *= f.partial_factor
    bad = [f.p for f in factors if f.partial_factor <= 0]
    if bad:
        warnings.warn(f"nonpositive local factors at p = {bad}", LocalObstructionWarning, stacklevel=2)
    stability = abs(value - previous) / abs(previous) if factors and previous else 0.0
    return SingularSeries(value, factors, stability, bad)


@dataclass
class IdentityCheck:
    name: str
    anchor: str
    lhs: float
    rhs: float
    tolerance: float
    relative_error: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        denom = max(abs(self.lhs), abs(self.rhs))
        self.relative_error = abs(self.lhs - self.rhs) / denom if denom else 0.0
        self.passed = self.relative_error <= self.tolerance


def local_identity_check(p: int, h: int, c, s: int | None = None, tolerance: float = 1e-6,
                         limits: Limits = DEFAULT_LIMITS, workers: int = 1) -> IdentityCheck:
    """Compare ``sum_{j <= h} S(p^j)`` with ``p^(h (4 - 2s)) M(p^h)``.

    ``M`` is the exact congruence count from :func:`cubiclines.counting.count_local`,
    which never touches an exponential sum.
    """
    from .counting import count_local

    c = as_coefficients(c)
    s = c.s if s is None else s
    lhs = math.fsum([1.0] + [local_average(p**j, c, s, limits=limits) for j in range(1, h + 1)])
    M = count_local(p**h, c, s, limits=limits, workers=workers).count
    rhs = float(M * Fraction(p) ** (h * (4 - 2 * s)))
    return IdentityCheck(f"local-density p={p} h={h} c={c}", "local density vs congruence count",
                         lhs, rhs, tolerance)
