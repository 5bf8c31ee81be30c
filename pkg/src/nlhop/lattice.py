"""Ring lattice fields, stencils and the variational functionals.

A field of period ``k`` is stored on the fundamental window
``P_k = {-(k//2), ..., k - k//2 - 1}``: array position ``j`` holds lattice
site ``l = j - k//2``. All stencils wrap modulo ``k``.

With ``Q(u) = <-Lap u, u> - omega |u|^2``, ``A(u) = sum u_l^2 u_{l+1}^2`` and
``B(u) = sum |u_l|^(2 sigma + 2)`` the two functionals are::

    J(u) = Q - alpha A - beta / (sigma + 1) B
    I(u) = Q - 2 alpha A - beta B

``I`` vanishes on the Nehari manifold and ``I(u) = <grad J(u), u> / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from ._backend import core
from .errors import InvalidK, InvalidRegime

__all__ = [
    "Regime",
    "ModelParams",
    "RingField",
    "WaveField",
    "laplacian_apply",
    "hopping_neighbors",
    "energy_parts",
    "quadratic_form",
    "hopping_sum",
    "power_sum",
    "functional_J",
    "functional_I",
    "reduced_J",
    "gradient_J",
    "el_field",
    "el_residual",
    "lp_norm",
]


class Regime(str, Enum):
    FOCUSING = "focusing"
    DEFOCUSING = "defocusing"


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the stationary lattice equation.

    ``omega u + Lap u + alpha u (|u_{l+1}|^2 + |u_{l-1}|^2) + beta |u|^(2 sigma) u = 0``

    Focusing requires ``alpha, beta > 0`` and ``omega < 0``; defocusing
    requires ``alpha, beta < 0`` and ``omega > 4``. ``sigma >= 1`` in both.
    """

    alpha: float = 1.0
    beta: float = 1.0
    sigma: float = 1.0
    omega: float = -1.0
    regime: Regime = Regime.FOCUSING

    def __post_init__(self):
        for name in ("alpha", "beta", "sigma", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidRegime(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        try:
            object.__setattr__(self, "regime", Regime(self.regime))
        except ValueError:
            raise InvalidRegime(f"unknown regime {self.regime!r}") from None
        if self.sigma < 1.0:
            raise InvalidRegime(f"sigma >= 1 required, got sigma={self.sigma}")
        if self.regime is Regime.FOCUSING:
            if not self.alpha > 0:
                raise InvalidRegime(f"focusing regime requires alpha > 0, got alpha={self.alpha}")
            if not self.beta > 0:
                raise InvalidRegime(f"focusing regime requires beta > 0, got beta={self.beta}")
            if not self.omega < 0:
                raise InvalidRegime(f"focusing regime requires omega < 0, got omega={self.omega}")
        else:
            if not self.alpha < 0:
                raise InvalidRegime(f"defocusing regime requires alpha < 0, got alpha={self.alpha}")
            if not self.beta < 0:
                raise InvalidRegime(f"defocusing regime requires beta < 0, got beta={self.beta}")
            if not self.omega > 4:
                raise InvalidRegime(f"defocusing regime requires omega > 4, got omega={self.omega}")

    @property
    def focusing(self) -> bool:
        return self.regime is Regime.FOCUSING


class _Field:
    _dtype: type = float

    def __init__(self, values):
        arr = np.array(values, dtype=self._dtype)
        if arr.ndim != 1:
            raise ValueError(f"field values must be one-dimensional, got shape {arr.shape}")
        if arr.size < 3:
            raise InvalidK(f"period k >= 3 required, got k={arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """Read-only array in window order (site ``-(k//2)`` first)."""
        return self._values

    @property
    def k(self) -> int:
        return self._values.size

    @property
    def indices(self) -> np.ndarray:
        k = self.k
        return np.arange(-(k // 2), k - k // 2)

    def position(self, l: int) -> int:
        """Array position of lattice site ``l`` (taken modulo k)."""
        return (l + self.k // 2) % self.k

    def at(self, l: int):
        return self._values[self.position(l)]

    def shift(self, s: int):
        """Field ``v`` with ``v_l = u_{l+s}``."""
        return type(self)(np.roll(self._values, -s))

    def __len__(self):
        return self.k

    def __array__(self, dtype=None, copy=None):
        return np.array(self._values, dtype=dtype)

    def __eq__(self, other):
        return type(other) is type(self) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((type(self).__name__, self._values.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(k={self.k}, values={np.array2string(self._values, precision=6)})"

    @classmethod
    def zeros(cls, k: int):
        return cls(np.zeros(k))

    @classmethod
    def constant(cls, k: int, c):
        return cls(np.full(k, c))

    @classmethod
    def delta(cls, k: int, l: int = 0, value=1.0):
        v = np.zeros(k, dtype=cls._dtype)
        v[(l + k // 2) % k] = value
        return cls(v)

    @classmethod
    def from_function(cls, k: int, f):
        """Field with ``u_l = f(l)`` for ``l`` in the fundamental window."""
        ls = np.arange(-(k // 2), k - k // 2)
        return cls(np.array([f(int(l)) for l in ls], dtype=cls._dtype))


class RingField(_Field):
    """Real k-periodic lattice field."""

    _dtype = float


class WaveField(_Field):
    """Complex k-periodic lattice field."""

    _dtype = complex

    @classmethod
    def from_real(cls, u: RingField, phase: float = 0.0):
        return cls(np.exp(1j * phase) * np.asarray(u.values, dtype=complex))


FieldLike = Union[RingField, WaveField, np.ndarray]


def _arr(u) -> np.ndarray:
    if isinstance(u, _Field):
        return u.values
    return np.asarray(u)


def _real(u) -> np.ndarray:
    return np.ascontiguousarray(_arr(u), dtype=float)


def _wrap(like, values):
    if isinstance(like, _Field):
        return type(like)(values)
    return values


def laplacian_apply(u: FieldLike):
    """Periodic discrete Laplacian ``u_{l+1} + u_{l-1} - 2 u_l``."""
    v = _arr(u)
    return _wrap(u, np.roll(v, -1) + np.roll(v, 1) - 2.0 * v)


def hopping_neighbors(u: FieldLike):
    """Real field ``|u_{l+1}|^2 + |u_{l-1}|^2``."""
    m2 = np.abs(_arr(u)) ** 2
    t = np.roll(m2, -1) + np.roll(m2, 1)
    return RingField(t) if isinstance(u, _Field) else t


def _sums(u, sigma):
    v = _arr(u)
    if np.iscomplexobj(v):
        return core.sums_complex(np.ascontiguousarray(v, dtype=complex), sigma)
    return core.sums_real(np.ascontiguousarray(v, dtype=float), sigma)


def energy_parts(u: FieldLike, p: ModelParams):
    """Return ``(Q, A, B)`` from a single compensated pass over the ring."""
    kin, n2, a, b = _sums(u, p.sigma)
    return kin - p.omega * n2, a, b


def quadratic_form(u: FieldLike, p: ModelParams) -> float:
    """``<-Lap u, u> - omega |u|^2``."""
    return energy_parts(u, p)[0]


def hopping_sum(u: FieldLike) -> float:
    """``A(u) = sum |u_l|^2 |u_{l+1}|^2``."""
    return _sums(u, 1.0)[2]


def power_sum(u: FieldLike, sigma: float) -> float:
    """``B(u) = sum |u_l|^(2 sigma + 2)``."""
    return _sums(u, sigma)[3]


def functional_J(u: FieldLike, p: ModelParams) -> float:
    q, a, b = energy_parts(u, p)
    return q - p.alpha * a - p.beta / (p.sigma + 1.0) * b


def functional_I(u: FieldLike, p: ModelParams) -> float:
    q, a, b = energy_parts(u, p)
    return q - 2.0 * p.alpha * a - p.beta * b


def reduced_J(u: FieldLike, p: ModelParams) -> float:
    """``alpha A + sigma beta / (sigma + 1) B``; equals J on the Nehari manifold."""
    _, a, b = energy_parts(u, p)
    return p.alpha * a + p.sigma * p.beta / (p.sigma + 1.0) * b


def el_field(u: FieldLike, p: ModelParams):
    """Defect of the stationary equation, sitewise."""
    out = core.el_field(_real(u), p.omega, p.alpha, p.beta, p.sigma)
    return _wrap(u, out)


def gradient_J(u: FieldLike, p: ModelParams):
    """Gradient of J; equals ``-2 * el_field(u)``."""
    out = -2.0 * core.el_field(_real(u), p.omega, p.alpha, p.beta, p.sigma)
    return _wrap(u, out)


def el_residual(u: FieldLike, p: ModelParams) -> float:
    """Max-norm of :func:`el_field`; zero exactly on stationary states."""
    return float(np.max(np.abs(core.el_field(_real(u), p.omega, p.alpha, p.beta, p.sigma))))


def lp_norm(u: FieldLike, p: float = 2.0) -> float:
    """l^p norm over the fundamental window (``p = inf`` for the max norm)."""
    v = np.abs(_arr(u))
    if math.isinf(p):
        return float(np.max(v))
    if p < 1:
        raise ValueError(f"p >= 1 required, got {p}")
    scale = float(np.max(v))
    if scale == 0.0:
        return 0.0
    return scale * math.fsum((v / scale) ** p) ** (1.0 / p)
