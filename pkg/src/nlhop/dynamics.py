"""Time evolution of the lattice Schrodinger flow.

    i dpsi/dt + Lap psi + alpha psi (|psi_{l+1}|^2 + |psi_{l-1}|^2)
        + beta |psi|^(2 sigma) psi = 0

The flow is Hamiltonian with energy ``H`` (see :func:`hamiltonian`) and
conserves the power ``sum |psi_l|^2``. Integration uses classical RK4, which
is not symplectic: conservation drift is a discretization-error indicator.
The state and stage vectors are carried in ``long double`` so that time
stepping error stays resolvable above roundoff at small steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .errors import NonFinite
from .lattice import ModelParams, RingField, WaveField, _arr

__all__ = [
    "EvolutionTrace",
    "flow_rhs",
    "evolve",
    "hamiltonian",
    "power",
    "stable_dt",
]


def _complex(psi) -> np.ndarray:
    return np.ascontiguousarray(_arr(psi), dtype=complex)


@dataclass(frozen=True)
class EvolutionTrace:
    """Sampled diagnostics of one run; ``final`` is the state at ``times[-1]``."""

    times: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    modulus_dev: np.ndarray
    final: WaveField
    dt: float
    # final state before rounding to double precision
    final_extended: np.ndarray = field(default=None, repr=False)

    def modulus_error(self, reference: "EvolutionTrace") -> float:
        """Max difference of final moduli against a finer-step reference run."""
        a = np.abs(self.final_extended)
        b = np.abs(reference.final_extended)
        return float(np.max(np.abs(a - b)))

    def power_drift(self) -> float:
        """Max relative deviation of the power from its initial value."""
        p0 = self.power[0]
        if p0 == 0:
            return float(np.max(np.abs(self.power)))
        return float(np.max(np.abs(self.power - p0)) / abs(p0))

    def energy_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.max(np.abs(self.energy - e0)) / scale)

    def rows(self):
        """Rows ``(t, power, energy, modulus_dev)``."""
        return zip(self.times.tolist(), self.power.tolist(), self.energy.tolist(),
                   self.modulus_dev.tolist())


def flow_rhs(psi, p: ModelParams) -> WaveField:
    """Time derivative ``i [Lap psi + alpha psi (T psi) + beta |psi|^(2 sigma) psi]``."""
    out = core.flow_rhs(_complex(psi), p.alpha, p.beta, p.sigma)
    return WaveField(out) if isinstance(psi, (RingField, WaveField)) else out


def hamiltonian(psi, p: ModelParams) -> float:
    """``sum |psi_{l+1} - psi_l|^2 - alpha sum |psi_l|^2 |psi_{l+1}|^2 - beta/(sigma+1) sum |psi_l|^(2 sigma + 2)``."""
    kin, _, a, b = core.sums_complex(_complex(psi), p.sigma)
    return kin - p.alpha * a - p.beta / (p.sigma + 1.0) * b


def power(psi) -> float:
    return core.sums_complex(_complex(psi), 1.0)[1]


def stable_dt(psi, p: ModelParams) -> float:
    """Largest time step accepted by :func:`evolve` for this state."""
    m2 = np.max(np.abs(_arr(psi))) ** 2 if np.size(_arr(psi)) else 0.0
    nonlinear = 4.0 * abs(p.alpha) * m2 + (2.0 * p.sigma + 1.0) * abs(p.beta) * m2**p.sigma
    return 0.1 / (4.0 + abs(p.omega) + nonlinear)


def evolve(psi0, p: ModelParams, dt: float = 1e-3, t_end: float = 10.0,
           sample_every: int = 1, check_dt: bool = True) -> EvolutionTrace:
    """Integrate the flow from ``psi0`` with fixed-step RK4.

    Takes ``round(t_end / dt)`` steps (at least one), so the final time is
    within ``dt / 2`` of ``t_end``. Samples are taken at step 0, every
    ``sample_every`` steps, and at the last step.

    Raises
    ------
    ValueError
        Non-positive ``dt``/``t_end``, or ``dt`` above :func:`stable_dt` when
        ``check_dt`` is set.
    NonFinite
        The state overflowed.
    """
    if not dt > 0 or not t_end > 0:
        raise ValueError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    psi = _complex(psi0)
    if check_dt and dt > stable_dt(psi, p):
        raise ValueError(f"dt={dt} exceeds the stability guard {stable_dt(psi, p):.3e}")
    nsteps = max(1, int(round(t_end / dt)))
    try:
        final, steps, pw, en, md = core.rk4_run(psi, p.alpha, p.beta, p.sigma, float(dt),
                                                nsteps, int(sample_every))
    except FloatingPointError as exc:
        raise NonFinite(str(exc)) from exc
    return EvolutionTrace(
        times=steps * dt,
        power=pw,
        energy=en,
        modulus_dev=md,
        final=WaveField(final.astype(complex)),
        dt=float(dt),
        final_extended=final,
    )
