"""Exact integer algebra of the cubic line system.

Monomials are always listed by decreasing power of ``x``, so the degree-3
Veronese vector is ``(x^3, x^2 y, x y^2, y^3)`` and its components pair with
the phase coefficients ``alpha_1 .. alpha_4`` in that order.

Scalar routines work on Python integers and never overflow.  The numpy
routines used by the enumeration engines run in int64 and must be guarded
with :func:`check_int64_range` first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

INT64_SAFE = 2**62


class RangeOverflow(OverflowError):
    """A guarded int64 computation would leave its safe range."""


@dataclass(frozen=True)
class CoefficientVector:
    """Nonzero integer coefficients ``c_1 .. c_s`` of the diagonal cubic form."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(c) for c in self.entries)
        if len(entries) < 1:
            raise ValueError("coefficient vector must have s >= 1 entries")
        if any(c == 0 for c in entries):
            raise ValueError(f"coefficients must be nonzero, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def s(self) -> int:
        return len(self.entries)

    @property
    def max_abs(self) -> int:
        return max(abs(c) for c in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.entries)

    @classmethod
    def parse(cls, text: str) -> "CoefficientVector":
        """Parse a comma separated list such as ``"1,-1,2"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        return cls(tuple(int(p) for p in parts))


def as_coefficients(c) -> CoefficientVector:
    if isinstance(c, CoefficientVector):
        return c
    if isinstance(c, str):
        return CoefficientVector.parse(c)
    if isinstance(c, (int, np.integer)):
        return CoefficientVector((int(c),))
    return CoefficientVector(tuple(c))


class FormValues(NamedTuple):
    """The four weighted sums ``sum c_i x_i^3, sum c_i x_i^2 y_i, sum c_i x_i y_i^2, sum c_i y_i^3``."""

    v1: int
    v2: int
    v3: int
    v4: int

    def is_zero(self) -> bool:
        return self.v1 == 0 and self.v2 == 0 and self.v3 == 0 and self.v4 == 0


@dataclass(frozen=True)
class SolutionPair:
    """A pair ``(x, y)`` of integer s-tuples together with the box it was drawn from.

    ``box`` is ``"symmetric"`` for ``|x_i|, |y_i| <= X`` and ``"positive"`` for
    ``1 <= x_i, y_i <= X``.
    """

    x: tuple[int, ...]
    y: tuple[int, ...]
    X: int
    box: str = "symmetric"

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same length")
        if self.box == "symmetric":
            lo, hi = -self.X, self.X
        elif self.box == "positive":
            lo, hi = 1, self.X
        else:
            raise ValueError(f"unknown box {self.box!r}")
        if any(not lo <= v <= hi for v in self.x + self.y):
            raise ValueError(f"entries must lie in [{lo}, {hi}]")


def veronese(d: int, x: int, y: int) -> tuple[int, ...]:
    """Degree-``d`` monomials of ``(x, y)``: ``(x^d, x^(d-1) y, ..., y^d)``.

    >>> veronese(3, 2, 3)
    (8, 12, 18, 27)
    """
    if d not in (1, 2, 3):
        raise ValueError(f"degree must be 1, 2 or 3, got {d}")
    x, y = int(x), int(y)
    return tuple(x ** (d - k) * y**k for k in range(d + 1))


def veronese_array(d: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorised :func:`veronese`; the result has shape ``x.shape + (d + 1,)``.

    int64 is used; callers bound ``|x|, |y|`` beforehand.
    """
    if d not in (1, 2, 3):
        raise ValueError(f"degree must be 1, 2 or 3, got {d}")
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    return np.stack([x ** (d - k) * y**k for k in range(d + 1)], axis=-1)


def sigma(s: int, d: int, l: int, x: Sequence[int], y: Sequence[int]) -> int:
    """Difference of the ``l``-th degree-``d`` monomial over the two halves.

    ``sum_{i <= s} nu_d(x_i, y_i)_l - sum_{i > s} nu_d(x_i, y_i)_l`` with
    ``l`` counted from 1.
    """
    if len(x) != 2 * s or len(y) != 2 * s:
        raise ValueError(f"x and y must have length 2s = {2 * s}")
    if not 1 <= l <= d + 1:
        raise IndexError(f"monomial index l={l} out of range 1..{d + 1}")
    first = sum(veronese(d, x[i], y[i])[l - 1] for i in range(s))
    second = sum(veronese(d, x[i], y[i])[l - 1] for i in range(s, 2 * s))
    return first - second


def system_values(c, x: Sequence[int], y: Sequence[int]) -> FormValues:
    """The four cubic forms of the line system evaluated at ``(x, y)``.

    ``(x, y)`` spans a line on the hypersurface exactly when all four vanish.
    """
    c = as_coefficients(c)
    if len(x) != c.s or len(y) != c.s:
        raise ValueError(f"x and y must have length s = {c.s}")
    acc = [0, 0, 0, 0]
    for ci, xi, yi in zip(c, x, y):
        for k, m in enumerate(veronese(3, xi, yi)):
            acc[k] += ci * m
    return FormValues(*acc)


def form_bound(c, X: int) -> int:
    """Upper bound ``s * max|c_i| * X^3`` on any form value over the box of radius X."""
    c = as_coefficients(c)
    return c.s * c.max_abs * int(X) ** 3


def check_int64_range(bound: int, what: str = "form values") -> None:
    if bound >= INT64_SAFE:
        raise RangeOverflow(f"{what} bound {bound} exceeds the int64 guard 2^62")


def linear_forms(h: Sequence, alpha: Sequence, beta: Sequence) -> tuple:
    """The three linear forms in ``h`` produced by shifting the variables.

    ``L1 = 3 h1 a1 + 2 h2 a2 + h3 a3``, ``L2 = h1 a2 + 2 h2 a3 + 3 h3 a4``,
    ``L3 = b1 h1 + b2 h2 + b3 h3``.  Works for ints, floats and Fractions.
    """
    h1, h2, h3 = h
    a1, a2, a3, a4 = alpha
    b1, b2, b3 = beta
    L1 = 3 * h1 * a1 + 2 * h2 * a2 + h3 * a3
    L2 = h1 * a2 + 2 * h2 * a3 + 3 * h3 * a4
    L3 = b1 * h1 + b2 * h2 + b3 * h3
    return L1, L2, L3


def shift_correction(h: Sequence, z1, z2, alpha: Sequence):
    """Phase lost by the cubic forms when every ``(x_i, y_i)`` is shifted by ``(z1, z2)``.

    Equals ``z1 * L1(h, alpha) + z2 * L2(h, alpha)``.
    """
    h1, h2, h3 = h
    a1, a2, a3, a4 = alpha
    return (
        3 * h1 * z1 * a1
        + (h1 * z2 + 2 * h2 * z1) * a2
        + (h3 * z1 + 2 * h2 * z2) * a3
        + 3 * h3 * z2 * a4
    )
