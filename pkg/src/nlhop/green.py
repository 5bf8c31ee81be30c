"""Green function of ``-Lap - omega`` on the ring and on the infinite line.

For ``omega < 0`` the operator is positive definite and its inverse has
strictly positive entries. On the line ``G(n, 0) = r**|n| / (1/r - r)``
where ``r`` in (0, 1) solves ``r + 1/r = 2 - omega``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidK, InvalidRegime
from .lattice import ModelParams, RingField, _real

__all__ = [
    "GreenOperator",
    "decay_rate",
    "green_periodic",
    "green_infinite",
    "ring_operator",
    "nonlinear_source",
    "fixed_point_image",
    "fixed_point_residual",
]

def decay_rate(omega: float) -> float:
    """Root ``r`` in (0, 1) of ``r + 1/r = 2 - omega``."""
    if not omega < 0:
        raise InvalidRegime(f"omega < 0 required, got omega={omega}")
    s = 2.0 - omega
    # cancellation-free form of (s - sqrt(s^2 - 4)) / 2
    return 2.0 / (s + math.sqrt(s * s - 4.0))


@dataclass(frozen=True)
class GreenOperator:
    """Resolvent kernel of ``-Lap - omega``.

    ``k`` is None for the infinite lattice, in which case ``entries`` is None
    and values come from the closed form in ``r``.
    """

    k: Optional[int]
    omega: float
    r: float
    entries: Optional[np.ndarray] = None

    @property
    def infinite(self) -> bool:
        return self.k is None

    def __call__(self, n: int, m: int = 0) -> float:
        if self.k is None:
            return green_infinite(n - m, self.omega)
        k = self.k
        return float(self.entries[(n + k // 2) % k, (m + k // 2) % k])

    def apply(self, f) -> np.ndarray:
        """``G f`` for a ring vector in window order."""
        if self.k is None:
            raise ValueError("apply is defined for the periodic operator only")
        return self.entries @ _real(f)


def ring_operator(k: int, omega: float) -> np.ndarray:
    """Dense matrix of ``-Lap - omega`` on the k-ring."""
    a = np.diag(np.full(k, 2.0 - omega))
    idx = np.arange(k)
    a[idx, (idx + 1) % k] -= 1.0
    a[idx, (idx - 1) % k] -= 1.0
    return a


def _circulant_column(k: int, omega: float) -> np.ndarray:
    # periodic images of the line kernel summed in closed form:
    # G(d) = g0 (r^d + r^(k-d)) / (1 - r^k), every term positive
    r = decay_rate(omega)
    s = 2.0 - omega
    g0 = 1.0 / math.sqrt(s * s - 4.0)
    d = np.arange(k, dtype=float)
    return g0 * (r**d + r ** (k - d)) / (1.0 - r**k)


def green_periodic(k: int, omega: float) -> GreenOperator:
    """Inverse of ``-Lap - omega`` on the ring of period ``k``.

    Entries are indexed in window order, so ``entries[i, j]`` couples sites
    ``i - k//2`` and ``j - k//2``. Far entries underflow to zero once
    ``r**(k/2)`` leaves the double range.
    """
    if k < 3:
        raise InvalidK(f"period k >= 3 required, got k={k}")
    r = decay_rate(omega)
    col = _circulant_column(k, omega)
    idx = np.arange(k)
    g = col[(idx[:, None] - idx[None, :]) % k]
    g.flags.writeable = False
    return GreenOperator(k=k, omega=float(omega), r=r, entries=g)


def green_infinite(n: int, omega: float) -> float:
    """``G(n, 0)`` of ``-Lap - omega`` on the integer lattice."""
    r = decay_rate(omega)
    s = 2.0 - omega
    return r ** abs(n) / math.sqrt(s * s - 4.0)


def nonlinear_source(u, p: ModelParams) -> np.ndarray:
    """``alpha u (T u) + beta |u|^(2 sigma) u``."""
    v = _real(u)
    up = np.roll(v, -1)
    um = np.roll(v, 1)
    return p.alpha * v * (up * up + um * um) + p.beta * np.power(v * v, p.sigma) * v


def fixed_point_image(u, p: ModelParams, green: Optional[GreenOperator] = None) -> RingField:
    """``G N(u)``: the right-hand side of the Green-function fixed-point form."""
    v = _real(u)
    green = green or green_periodic(v.size, p.omega)
    return RingField(green.apply(nonlinear_source(v, p)))


def fixed_point_residual(u, p: ModelParams, green: Optional[GreenOperator] = None) -> float:
    """Max-norm of ``u - G N(u)``; zero exactly on stationary states."""
    if not p.focusing:
        raise InvalidRegime("fixed-point form requires focusing parameters")
    v = _real(u)
    return float(np.max(np.abs(v - fixed_point_image(v, p, green).values)))
