"""Real (archimedean) densities of the cubic line system.

``u(g) = int_{[-1,1]^2} e(g1 s^3 + g2 s^2 t + g3 s t^2 + g4 t^3) ds dt`` and
``v(g; P)``, the same integral over ``[-P, P]^2``.  The singular integral
``int_{R^4} prod_j u(c_j g) dg`` is estimated two ways:

* ``singular_integral_mc``: Monte Carlo volume of the slab
  ``{z in [-1,1]^(2s): |Phi_l(z)| <= sigma, l = 1..4}`` scaled by ``(2 sigma)^-4``;
* ``singular_integral_quad``: a tensor grid over ``[-R, R]^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from ._limits import DEFAULT_LIMITS, Limits
from ._parallel import map_ordered
from .forms import as_coefficients

TWO_PI = 2.0 * math.pi
GL_ORDER = 16
GAMMA_ENVELOPE = 1e3
MAX_PANELS = 4096
MC_BLOCK = 1 << 16


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within the panel budget."""


def _gl_composite(L: float, panels: int, order: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[-L, L]``."""
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-L, L, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tensor_sum(gamma: Sequence[float], nodes: np.ndarray, weights: np.ndarray) -> complex:
    # the node set is symmetric and (s, t) -> (-s, -t) conjugates the
    # integrand, so twice the real part over s > 0 is the whole sum
    g1, g2, g3, g4 = (float(g) for g in gamma)
    keep = nodes > 0
    s, ws = nodes[keep], 2.0 * weights[keep]
    total = 0.0
    step = max(1, (1 << 21) // len(nodes))
    for lo in range(0, len(nodes), step):
        t = nodes[lo:lo + step]
        wt = weights[lo:lo + step]
        ph = (g1 * s**3)[:, None] + g2 * (s**2)[:, None] * t[None, :] \
            + g3 * s[:, None] * (t**2)[None, :] + (g4 * t**3)[None, :]
        total += ws @ np.cos(TWO_PI * ph) @ wt
    return complex(total, 0.0)


def _cycles(gamma: Sequence[float], L: float) -> float:
    """Upper bound on the number of phase cycles along either axis of ``[-L, L]^2``."""
    g1, g2, g3, g4 = (abs(float(g)) for g in gamma)
    return 2.0 * L**3 * max(3 * g1 + 2 * g2 + g3, g2 + 2 * g3 + 3 * g4)


def _adaptive_square(gamma: Sequence[float], L: float, tol: float, limits: Limits) -> complex:
    # 16-point panels resolve about three phase cycles to near machine precision
    panels = max(2, math.ceil(_cycles(gamma, L) / 3.0))
    nodes, weights = _gl_composite(L, panels)
    coarse = _tensor_sum(gamma, nodes, weights)
    while True:
        panels *= 2
        if panels > MAX_PANELS:
            raise QuadratureError(f"no convergence to {tol:g} within {MAX_PANELS} panels per axis")
        limits.check_work(float(panels * GL_ORDER) ** 2, "oscillatory quadrature")
        nodes, weights = _gl_composite(L, panels)
        fine = _tensor_sum(gamma, nodes, weights)
        if abs(fine - coarse) <= tol:
            return fine
        coarse = fine


def _check_envelope(gamma: Sequence[float]) -> None:
    if len(gamma) != 4:
        raise ValueError("gamma needs 4 coordinates")
    if not all(math.isfinite(float(g)) for g in gamma):
        raise ValueError("gamma must be finite")
    if max(abs(float(g)) for g in gamma) > GAMMA_ENVELOPE:
        raise QuadratureError(f"|gamma|_inf exceeds the supported envelope {GAMMA_ENVELOPE:g}")


def u_eval(gamma: Sequence[float], tol: float = 1e-10, limits: Limits = DEFAULT_LIMITS) -> complex:
    """``u(gamma)`` by composite Gauss-Legendre on ``[-1, 1]^2``.

    The panel count starts proportional to the phase variation and doubles
    until two successive results agree to ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_envelope(gamma)
    return _adaptive_square(gamma, 1.0, tol, limits)


def v_eval(gamma: Sequence[float], P: float, tol: float = 1e-10, limits: Limits = DEFAULT_LIMITS) -> complex:
    """``v(gamma; P) = P^2 u(P^3 gamma)`` (substitute ``s -> P s``, ``t -> P t``)."""
    if P <= 0:
        raise ValueError("P must be positive")
    scaled = [P**3 * float(g) for g in gamma]
    return P * P * u_eval(scaled, tol / (P * P), limits)


def v_direct(gamma: Sequence[float], P: float, tol: float = 1e-10, limits: Limits = DEFAULT_LIMITS) -> complex:
    """Oracle for :func:`v_eval`: quadrature directly on ``[-P, P]^2``."""
    if P <= 0:
        raise ValueError("P must be positive")
    _check_envelope(gamma)
    return _adaptive_square(gamma, float(P), tol, limits)


@dataclass
class DensityEstimate:
    value: float
    standard_error: float
    samples: int
    sigma: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # counter-based stream per (seed, block): independent of scheduling
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(block,))))


def _overlap(alo, ahi, blo, bhi):
    return np.maximum(0.0, np.minimum(ahi, bhi) - np.maximum(alo, blo))


def _conditional_volume(A: np.ndarray, ci: float, u: np.ndarray, sigma: float) -> np.ndarray:
    """Probability, over ``(x, y)`` uniform on ``[-1, 1]^2``, that every
    ``|ci * nu_l(x, y) + A_l| <= sigma``, estimated without bias from one
    uniform draw ``u`` per row.

    The first and last constraints pin ``x`` and ``y`` to intervals; ``y`` is
    drawn uniformly from its interval and the admissible length in ``x`` is
    computed exactly.
    """
    a1, a2, a3, a4 = A[:, 0], A[:, 1], A[:, 2], A[:, 3]
    p, m = (-a1 + sigma) / ci, (-a1 - sigma) / ci
    xlo = np.clip(np.cbrt(np.minimum(p, m)), -1.0, 1.0)
    xhi = np.clip(np.cbrt(np.maximum(p, m)), -1.0, 1.0)
    p, m = (-a4 + sigma) / ci, (-a4 - sigma) / ci
    ylo = np.clip(np.cbrt(np.minimum(p, m)), -1.0, 1.0)
    yhi = np.clip(np.cbrt(np.maximum(p, m)), -1.0, 1.0)
    J = np.maximum(0.0, yhi - ylo)
    y = ylo + u * J
    y = np.where(y == 0.0, 1e-300, y)
    # |ci y^2 x + a3| <= sigma
    d = ci * y * y
    p, m = (-a3 + sigma) / d, (-a3 - sigma) / d
    lo = np.maximum(xlo, np.minimum(p, m))
    hi = np.minimum(xhi, np.maximum(p, m))
    # |ci y x^2 + a2| <= sigma  <=>  x^2 in [t_lo, t_hi]
    d = ci * y
    p, m = (-a2 + sigma) / d, (-a2 - sigma) / d
    t_hi = np.maximum(p, m)
    t_lo = np.minimum(p, m)
    r_hi = np.sqrt(np.maximum(t_hi, 0.0))
    r_lo = np.sqrt(np.maximum(t_lo, 0.0))
    length = _overlap(lo, hi, r_lo, r_hi) + _overlap(lo, hi, -r_hi, -r_lo)
    length = np.where(t_hi >= 0.0, length, 0.0)
    return J * length / 4.0


def _mc_block(c: np.ndarray, sigmas: Sequence[float], seed: int, block: int, size: int) -> np.ndarray:
    """Per-sigma ``[sum Z, sum Z^2]`` over one block of samples."""
    s = len(c)
    rng = _block_rng(seed, block)
    z = rng.uniform(-1.0, 1.0, size=(size, 2 * s))
    u = rng.random(size=(size, s))
    x, y = z[:, :s], z[:, s:]
    nu = np.stack([x**3, x * x * y, x * y * y, y**3], axis=-1) * c[None, :, None]
    total = nu.sum(axis=1)
    out = np.zeros((len(sigmas), 2))
    for k, sig in enumerate(sigmas):
        Z = np.zeros(size)
        for i in range(s):
            Z += _conditional_volume(total - nu[:, i, :], float(c[i]), u[:, i], sig)
        Z /= s
        out[k] = (math.fsum(Z.tolist()), math.fsum((Z * Z).tolist()))
    return out


def _mc_estimates(c, sigmas: Sequence[float], n: int, seed: int, workers: int) -> list[DensityEstimate]:
    c = np.asarray(list(as_coefficients(c)), dtype=np.float64)
    s = len(c)
    blocks = [(b, min(MC_BLOCK, n - b * MC_BLOCK)) for b in range(math.ceil(n / MC_BLOCK))]
    parts = map_ordered(lambda bs: _mc_block(c, sigmas, seed, bs[0], bs[1]), blocks, workers)
    results = []
    for k, sig in enumerate(sigmas):
        s1 = math.fsum(p[k, 0] for p in parts)
        s2 = math.fsum(p[k, 1] for p in parts)
        mean = s1 / n
        var = max(0.0, s2 / n - mean * mean) * n / max(n - 1, 1)
        scale = 2.0 ** (2 * s) / (2.0 * sig) ** 4
        results.append(DensityEstimate(scale * mean, scale * math.sqrt(var / n), n, float(sig), int(seed)))
    return results


def singular_integral_mc(c, s: int | None = None, sigma: float = 0.05, n: int = 10**6, seed: int = 0,
                         workers: int = 1) -> DensityEstimate:
    """Monte Carlo slab estimate of the singular integral.

    Each sample fixes all variables and, for every index ``i`` in turn,
    replaces ``(x_i, y_i)`` by the exact conditional slab probability given
    the others (with one uniform draw for ``y_i``); the ``s`` conditional
    values are averaged.  This is an unbiased estimator of the slab volume
    fraction.  Samples come in blocks of ``2^16`` with one counter-based
    stream per block, so the result is independent of ``workers``.
    """
    c = as_coefficients(c)
    if s is not None and s != c.s:
        raise ValueError(f"s={s} does not match {c.s} coefficients")
    if sigma <= 0 or n < 1:
        raise ValueError("sigma must be positive and n >= 1")
    return _mc_estimates(c, [sigma], n, seed, workers)[0]


def sigma_check(c, s: int | None = None, sigma: float = 0.05, n: int = 10**6, seed: int = 0,
                workers: int = 1) -> tuple[DensityEstimate, DensityEstimate, float]:
    """Estimates at ``sigma`` and ``sigma / 2`` on common samples, plus their relative difference."""
    c = as_coefficients(c)
    if s is not None and s != c.s:
        raise ValueError(f"s={s} does not match {c.s} coefficients")
    full, half = _mc_estimates(c, [sigma, sigma / 2], n, seed, workers)
    rel = abs(full.value - half.value) / max(abs(full.value), abs(half.value), 1e-300)
    return full, half, rel


def _trapezoid(R: float, grid: int) -> tuple[np.ndarray, np.ndarray]:
    g = np.linspace(-R, R, grid)
    w = np.full(grid, 2.0 * R / (grid - 1))
    w[0] = w[-1] = R / (grid - 1)
    return g, w


def u_on_grid(values: np.ndarray, nodes_1d: int) -> np.ndarray:
    """``u`` at every point of ``values^4`` (a tensor grid), shape ``(G, G, G, G)``.

    Folding the four sign patterns of ``(s, t)`` gives
    ``u(g) = 4 sum_{s, t > 0} w_s w_t cos(2 pi P) cos(2 pi Q)`` with
    ``P = g1 s^3 + g3 s t^2`` and ``Q = g2 s^2 t + g4 t^3``, so ``u`` is real
    and the 4-way table is one real matrix product over the quadrant nodes.
    """
    if nodes_1d % 2:
        nodes_1d += 1
    t, w = np.polynomial.legendre.leggauss(nodes_1d)
    keep = t > 0
    t, w = t[keep], w[keep]
    S, T = np.meshgrid(t, t, indexing="ij")
    S, T = S.ravel(), T.ravel()
    W = 4.0 * np.outer(w, w).ravel()
    G = len(values)
    out = np.zeros((G * G, G * G))
    step = 2048
    for lo in range(0, len(S), step):
        s_, t_, w_ = S[lo:lo + step], T[lo:lo + step], W[lo:lo + step]
        P = values[:, None, None] * (s_**3)[None, None, :] + values[None, :, None] * (s_ * t_ * t_)[None, None, :]
        Q = values[:, None, None] * (s_ * s_ * t_)[None, None, :] + values[None, :, None] * (t_**3)[None, None, :]
        # rows of A are (g1, g3), rows of B are (g2, g4)
        A = np.cos(TWO_PI * P).reshape(G * G, -1)
        B = (np.cos(TWO_PI * Q) * w_[None, None, :]).reshape(G * G, -1)
        out += A @ B.T
    # out[(g1, g3), (g2, g4)] -> [g1, g2, g3, g4]
    return out.reshape(G, G, G, G).transpose(0, 2, 1, 3)


def _nodes_for(max_abs_gamma: float) -> int:
    # phase variation along an axis is at most 12 |gamma|_inf cycles on [-1, 1]
    omega = TWO_PI * 6.0 * max_abs_gamma
    n = int(math.ceil(0.75 * omega)) + 24
    return n + (n % 2)


def singular_integral_quad(c, s: int | None = None, R: float = 2.0, grid: int = 41,
                           limits: Limits = DEFAULT_LIMITS, check_tol: float = 1e-7) -> float:
    """Trapezoidal tensor grid for ``int_{[-R, R]^4} prod_j u(c_j g) dg`` (real part).

    ``u`` is tabulated once per distinct coefficient; a few grid points of
    largest modulus are re-evaluated with :func:`u_eval` to confirm the
    fixed Gauss-Legendre rule resolved the oscillation.
    """
    c = as_coefficients(c)
    if s is not None and s != c.s:
        raise ValueError(f"s={s} does not match {c.s} coefficients")
    if R <= 0:
        return 0.0
    if grid < 2:
        raise ValueError("grid needs at least 2 points per axis")
    g, w = _trapezoid(R, grid)
    exps: dict[int, int] = {}
    for cj in c:
        exps[cj] = exps.get(cj, 0) + 1
    integrand = np.ones((grid,) * 4)
    for cj in sorted(exps):
        vals = cj * g
        nodes = _nodes_for(abs(cj) * R)
        limits.check_work(float(grid) ** 4 * nodes**2 / 2, "singular_integral_quad")
        table = u_on_grid(vals, nodes)
        for idx in [(0, 0, 0, 0), (grid - 1,) * 4, (0, grid - 1, 0, grid - 1), (grid // 2,) * 4]:
            ref = u_eval([vals[i] for i in idx], tol=check_tol / 10, limits=limits)
            if abs(ref - table[idx]) > check_tol:
                raise QuadratureError(f"grid rule off by {abs(ref - table[idx]):.2e} at {idx}")
        integrand *= table ** exps[cj]
    weights = w[:, None, None, None] * w[None, :, None, None] * w[None, None, :, None] * w[None, None, None, :]
    return float(np.sum(integrand * weights))
