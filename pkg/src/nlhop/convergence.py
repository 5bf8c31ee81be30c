"""Alignment, staggering and the periodic-to-localized k-sweep.

The localized ground state on the integer lattice is approximated by the
periodic ground state with the largest swept period; smaller periods are
compared to it after peak alignment on a common window.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import InvalidK, InvalidRegime, NoConvergence, OddPeriod, WindowTooLarge, ZeroField
from .lattice import ModelParams, Regime, RingField, _Field, el_residual, functional_I, functional_J
from .nehari import GroundState, SolverOptions, ground_state, power_lower_bound, project_field

__all__ = [
    "align",
    "embed_window",
    "stagger",
    "defocusing_reduce",
    "solve",
    "trial_objective",
    "SweepRecord",
    "ConvergenceReport",
    "k_sweep",
]

# relative tolerance under which two peak heights count as tied
PEAK_TIE_RTOL = 1e-9


def align(u):
    """Cyclic shift putting the largest ``|u_l|`` at site 0, signed so ``u_0 > 0``.

    Peaks within ``PEAK_TIE_RTOL`` of the maximum are treated as tied. Ties
    go to the candidate with the largest ``|u_1| - |u_{-1}|`` (so a two-site
    plateau lands on sites 0 and 1), then to the smallest window index.
    """
    v = np.asarray(u.values if isinstance(u, _Field) else u)
    a = np.abs(v)
    top = float(np.max(a))
    if top == 0.0:
        raise ZeroField("cannot align the zero field")
    k = v.size
    candidates = np.flatnonzero(a >= top * (1.0 - PEAK_TIE_RTOL))
    pos = int(candidates[0])
    if candidates.size > 1:
        lean = a[(candidates + 1) % k] - a[(candidates - 1) % k]
        best = float(np.max(lean))
        pos = int(candidates[np.flatnonzero(lean >= best - top * PEAK_TIE_RTOL)[0]])
    # window position k//2 is site 0
    shifted = np.roll(v, k // 2 - pos)
    if shifted[k // 2].real < 0:
        shifted = -shifted
    if isinstance(u, _Field):
        return type(u)(shifted)
    return shifted


def embed_window(u, L: int) -> np.ndarray:
    """Values at sites ``-L..L`` of the aligned field."""
    v = align(u)
    arr = np.asarray(v.values if isinstance(v, _Field) else v)
    k = arr.size
    if L < 0 or 2 * L + 1 > k:
        raise WindowTooLarge(f"window 2L+1={2 * L + 1} does not fit in period k={k}")
    c = k // 2
    return arr[c - L:c + L + 1].copy()


def stagger(u):
    """``v_l = (-1)^l u_l`` on a ring of even period."""
    v = np.asarray(u.values if isinstance(u, _Field) else u)
    k = v.size
    if k % 2:
        raise OddPeriod(f"staggering needs an even period, got k={k}")
    ls = np.arange(-(k // 2), k - k // 2)
    out = np.where(ls % 2 == 0, v, -v)
    if isinstance(u, _Field):
        return type(u)(out)
    return out


def defocusing_reduce(p: ModelParams) -> ModelParams:
    """Focusing parameters whose solutions, staggered, solve the defocusing problem."""
    if p.regime is not Regime.DEFOCUSING:
        raise InvalidRegime("defocusing_reduce expects defocusing parameters")
    return ModelParams(alpha=-p.alpha, beta=-p.beta, sigma=p.sigma, omega=4.0 - p.omega,
                       regime=Regime.FOCUSING)


def solve(p: ModelParams, k: int, opts: Optional[SolverOptions] = None) -> GroundState:
    """Ground state for either regime.

    Defocusing problems are solved in their staggered focusing form; the
    returned field, objective and residuals refer to the original parameters.
    """
    if p.focusing:
        return ground_state(p, k, opts)
    if k % 2:
        raise OddPeriod(f"defocusing solutions via staggering need even k, got k={k}")
    reduced = defocusing_reduce(p)
    try:
        gs = ground_state(reduced, k, opts)
    except NoConvergence as exc:
        if exc.best is not None:
            exc.best = _unstagger(exc.best, p)
        raise
    return _unstagger(gs, p)


def _unstagger(gs: GroundState, p: ModelParams) -> GroundState:
    u = stagger(gs.field)
    return replace(
        gs,
        field=u,
        params=p,
        objective=functional_J(u, p),
        el_resid=el_residual(u, p),
        nehari_resid=abs(functional_I(u, p)),
    )


def trial_objective(p: ModelParams, k: int = 8) -> float:
    """J of the single-site field projected onto the Nehari manifold.

    Upper-bounds every periodic ground-state level m_k with ``k >= 3``.
    """
    return functional_J(project_field(RingField.delta(k), p), p)


@dataclass(frozen=True)
class SweepRecord:
    k: int
    m_k: float
    power: float
    el_resid: float
    distance_to_ref: float
    ok: bool = True
    error: str = ""


@dataclass(frozen=True)
class ConvergenceReport:
    params: ModelParams
    records: List[SweepRecord]
    ref_k: Optional[int]
    fields: dict = field(default_factory=dict, repr=False)

    def _ok(self):
        return [r for r in self.records if r.ok]

    def objective_gaps(self) -> List[float]:
        """``|m_{k'} - m_k|`` between consecutive successful periods."""
        ok = self._ok()
        return [abs(b.m_k - a.m_k) for a, b in zip(ok, ok[1:])]

    def gaps_decreasing(self) -> bool:
        gaps = self.objective_gaps()
        return all(b < a for a, b in zip(gaps, gaps[1:]))

    def distances_decreasing(self) -> bool:
        d = [r.distance_to_ref for r in self._ok()]
        return all(b < a for a, b in zip(d, d[1:]))

    def power_bound_holds(self, tol: float = 1e-8) -> bool:
        bound = power_lower_bound(self.params if self.params.focusing else defocusing_reduce(self.params))
        return all(r.power >= bound - tol for r in self._ok())

    def objectives_below(self, value: float) -> bool:
        return all(r.m_k <= value for r in self._ok())

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.records)


def _solve_one(args):
    p, k, opts = args
    try:
        return k, solve(p, k, opts), ""
    except NoConvergence as exc:
        return k, None, str(exc)


def k_sweep(p: ModelParams, ks: Sequence[int], opts: Optional[SolverOptions] = None,
            workers: int = 1) -> ConvergenceReport:
    """Ground states over increasing periods, compared to the largest one.

    Failed solves are kept as records with ``ok=False`` and NaN values.
    ``workers > 1`` solves periods in separate processes; the report is
    ordered by k regardless.
    """
    ks = sorted(int(k) for k in ks)
    if not ks:
        raise ValueError("ks must not be empty")
    if ks[0] < 3:
        raise InvalidK(f"all periods must be >= 3, got {ks[0]}")
    opts = opts or SolverOptions()
    jobs = [(p, k, opts) for k in ks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    else:
        results = [_solve_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    aligned = {k: align(gs.field) for k, gs, _ in results if gs is not None}
    ref_k = max(aligned) if aligned else None
    records = []
    for k, gs, err in results:
        if gs is None:
            nan = math.nan
            records.append(SweepRecord(k, nan, nan, nan, nan, ok=False, error=err))
            continue
        L = (k - 1) // 2
        diff = embed_window(aligned[k], L) - embed_window(aligned[ref_k], L)
        dist = 0.0 if k == ref_k else math.sqrt(math.fsum(diff * diff))
        records.append(SweepRecord(k, gs.objective, gs.power, gs.el_resid, dist))
    return ConvergenceReport(params=p, records=records, ref_k=ref_k, fields=aligned)
