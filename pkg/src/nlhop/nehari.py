"""Nehari projection and the periodic ground-state solver.

The solver minimizes J over the Nehari manifold ``{u != 0 : I(u) = 0}`` by
gradient steps retracted onto the manifold along rays (each ray crosses the
manifold exactly once), then polishes the minimizer with Newton's method on
the stationary equation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateNonlinearity,
    InvalidK,
    InvalidRegime,
    NoConvergence,
    SingularJacobian,
    ZeroField,
)
from .lattice import (
    ModelParams,
    RingField,
    _real,
    el_field,
    energy_parts,
    functional_I,
    functional_J,
)

__all__ = [
    "NehariScaling",
    "SolverOptions",
    "GroundState",
    "nehari_project",
    "project_field",
    "j_along_ray",
    "power_lower_bound",
    "el_jacobian",
    "newton_polish",
    "morse_index",
    "ground_state",
    "initial_guesses",
]


@dataclass(frozen=True)
class NehariScaling:
    """Positive root ``t_star`` of the fibering map ``rho(t) = I(sqrt(t) u)``."""

    t_star: float
    bracket: tuple
    iterations: int
    residual: float


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 10000
    restarts: int = 8
    seed: int = 0
    step0: float = 1.0
    armijo_c: float = 1e-4
    # Newton is tried once the EL residual drops below polish_switch * max|u|
    polish_switch: float = 1e-2
    max_newton: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts}")
        if not self.step0 > 0:
            raise ValueError(f"step0 must be positive, got {self.step0}")
        if not 0 < self.armijo_c < 1:
            raise ValueError(f"armijo_c must lie in (0, 1), got {self.armijo_c}")


@dataclass(frozen=True)
class GroundState:
    """Converged (or best available) minimizer of J over the Nehari manifold."""

    field: RingField
    params: ModelParams
    objective: float
    power: float
    el_resid: float
    nehari_resid: float
    iterations: int
    restarts: int
    start_index: int = 0
    history: tuple = field(default=(), repr=False)

    @property
    def k(self) -> int:
        return self.field.k


def _solve_monotone(f, df, hi0=1.0, rel=1e-4, newton_steps=3, max_bisect=2000):
    """Root of a strictly decreasing ``f`` on ``(0, inf)`` with ``f(0+) > 0``.

    Bracket by doubling, bisect down to relative width ``rel``, then take
    safeguarded Newton steps; falls back to full bisection if Newton stalls.
    Returns ``(root, (lo, hi), iterations)``.
    """
    lo, hi = 0.0, hi0
    it = 0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        it += 1
        if hi > 1e300:
            raise DegenerateNonlinearity("no sign change found while bracketing")
    bracket = (lo, hi)
    while hi - lo > rel * hi and it < max_bisect:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        it += 1
    t = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        d = df(t)
        if d == 0:
            break
        tn = t - f(t) / d
        if not lo <= tn <= hi:
            break
        t = tn
        it += 1
    return t, bracket, it


def _rho_over_t(q, a, b, p):
    two_a = 2.0 * p.alpha * a
    bb = p.beta * b
    s = p.sigma

    def g(t):
        return q - two_a * t - bb * t**s

    def dg(t):
        return -two_a - s * bb * t ** (s - 1.0)

    return g, dg


def nehari_project(u, p: ModelParams) -> NehariScaling:
    """Scale ``t_star`` such that ``sqrt(t_star) * u`` lies on the Nehari manifold.

    Raises
    ------
    ZeroField
        If ``u`` vanishes identically.
    DegenerateNonlinearity
        If both nonlinear sums vanish, or the quadratic form is not positive.
    """
    v = _real(u)
    if not np.any(v):
        raise ZeroField("cannot project the zero field")
    q, a, b = energy_parts(v, p)
    if p.alpha * a <= 0 and p.beta * b <= 0:
        raise DegenerateNonlinearity("nonlinear sums vanish; rho(t) = tQ has no positive root")
    if not q > 0:
        raise DegenerateNonlinearity(f"quadratic form must be positive, got Q={q}")
    g, dg = _rho_over_t(q, a, b, p)
    # initial bracket guess from the dominant nonlinear term
    hi0 = q / (2.0 * p.alpha * a + p.beta * b)
    t, bracket, it = _solve_monotone(g, dg, hi0=hi0)
    tol = 1e-12 * q * max(1.0, t)
    if abs(t * g(t)) > tol:
        t, bracket2, it2 = _solve_monotone(g, dg, hi0=hi0, rel=4e-16, newton_steps=3)
        it += it2
    return NehariScaling(t_star=t, bracket=bracket, iterations=it, residual=abs(t * g(t)))


def project_field(u, p: ModelParams) -> RingField:
    """``sqrt(t_star) * u`` as a RingField."""
    s = nehari_project(u, p)
    return RingField(math.sqrt(s.t_star) * _real(u))


def j_along_ray(u, t: float, p: ModelParams) -> float:
    """``theta(t) = J(sqrt(t) u)`` via the closed-form scaling in ``t``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    q, a, b = energy_parts(u, p)
    s = p.sigma
    return t * q - t * t * p.alpha * a - t ** (s + 1.0) * p.beta * b / (s + 1.0)


def power_lower_bound(p: ModelParams) -> float:
    """Smallest power a nontrivial stationary state can carry.

    Unique positive root ``P`` of ``beta P**sigma + 2 alpha P = |omega|``.
    """
    if not p.focusing:
        raise InvalidRegime("power bound is defined for focusing parameters; reduce defocusing first")
    w = abs(p.omega)
    s = p.sigma

    def f(x):
        return w - p.beta * x**s - 2.0 * p.alpha * x

    def df(x):
        return -s * p.beta * x ** (s - 1.0) - 2.0 * p.alpha

    x, _, _ = _solve_monotone(f, df, hi0=1.0)
    if abs(f(x)) > 1e-12 * w:
        x, _, _ = _solve_monotone(f, df, hi0=1.0, rel=4e-16)
    return x


def el_jacobian(u, p: ModelParams) -> np.ndarray:
    """Dense symmetric Jacobian of the stationary-equation defect."""
    v = _real(u)
    k = v.size
    up = np.roll(v, -1)
    um = np.roll(v, 1)
    m2 = v * v
    diag = (
        p.omega
        - 2.0
        + p.alpha * (up * up + um * um)
        + p.beta * (2.0 * p.sigma + 1.0) * np.power(m2, p.sigma)
    )
    jac = np.diag(diag)
    idx = np.arange(k)
    jac[idx, (idx + 1) % k] = 1.0 + 2.0 * p.alpha * v * up
    jac[idx, (idx - 1) % k] = 1.0 + 2.0 * p.alpha * v * um
    return jac


def morse_index(u, p: ModelParams) -> int:
    """Number of descending directions of J at ``u`` (Hessian eigenvalues < 0).

    A nondegenerate minimizer over the Nehari manifold has index 1: the
    radial direction only.
    """
    ev = np.linalg.eigvalsh(el_jacobian(u, p))
    scale = max(1.0, float(np.max(np.abs(ev))))
    # Hessian of J is -2 times the Jacobian of the defect
    return int(np.sum(ev > 1e-12 * scale))


def newton_polish(u, p: ModelParams, tol: float = 1e-12, max_steps: int = 50,
                  refine: int = 0, trace: Optional[list] = None) -> RingField:
    """Refine an approximate stationary state by Newton's method.

    Iterates until the max-norm defect is at most ``tol``; then takes up to
    ``refine`` further steps while each one at least halves the defect.
    Residuals (including the initial one) are appended to ``trace``.

    Raises
    ------
    SingularJacobian
        Jacobian is singular or too ill-conditioned to trust.
    NoConvergence
        Defect still above ``tol`` after ``max_steps`` steps.
    """
    v = _real(u).copy()
    f = el_field(v, p)
    res = float(np.max(np.abs(f)))
    if trace is not None:
        trace.append(res)

    def step(v, f):
        jac = el_jacobian(v, p)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                delta = scipy.linalg.solve(jac, f, assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise SingularJacobian(str(exc)) from exc
        return v - delta

    n = 0
    while res > tol:
        if n >= max_steps:
            raise NoConvergence(f"Newton defect {res:.3e} > {tol:.1e} after {n} steps", best=RingField(v))
        v = step(v, f)
        n += 1
        if not np.all(np.isfinite(v)):
            raise NoConvergence("Newton iterate became non-finite")
        f = el_field(v, p)
        res = float(np.max(np.abs(f)))
        if trace is not None:
            trace.append(res)
    for _ in range(refine):
        if res == 0.0:
            break
        w = step(v, f)
        fw = el_field(w, p)
        rw = float(np.max(np.abs(fw)))
        if not rw <= 0.5 * res:
            break
        v, f, res = w, fw, rw
        if trace is not None:
            trace.append(res)
    return RingField(v)


def initial_guesses(k: int, restarts: int, seed: int):
    """Deterministic centred bump followed by ``restarts`` seeded random bumps."""
    ls = np.arange(-(k // 2), k - k // 2)
    yield np.exp(-np.abs(ls) / 2.0)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        centre = rng.integers(-(k // 2), k - k // 2)
        width = rng.uniform(0.5, max(1.0, k / 4.0))
        dist = np.abs((ls - centre + k // 2) % k - k // 2)
        noise = rng.uniform(0.5, 1.5, size=k)
        yield rng.uniform(0.5, 2.0) * np.exp(-dist / width) * noise


def _try_polish(u, j, p, opts):
    """Newton-polished copy of ``u`` if it is a positive index-1 solution not above ``J(u)``."""
    try:
        w = newton_polish(u, p, tol=opts.tol, max_steps=opts.max_newton, refine=3).values
    except (SingularJacobian, NoConvergence):
        return None
    if np.any(w <= 0):
        w = np.abs(w)
        if not np.all(w > 0):
            return None
    if float(np.max(np.abs(el_field(w, p)))) > opts.tol:
        return None
    if functional_J(w, p) > j + 1e-12 * (1.0 + abs(j)):
        return None
    if morse_index(w, p) != 1:
        return None
    return np.array(w)


def _descend(u0, p: ModelParams, opts: SolverOptions):
    """Projected descent from one start. Returns ``(u, J, res, iters, history, ok)``."""
    u = np.abs(u0)
    u = math.sqrt(nehari_project(u, p).t_star) * u
    j = functional_J(u, p)
    history = [j]
    step = opts.step0
    g = -2.0 * el_field(u, p)
    u_prev = g_prev = None
    it = 0
    switch = opts.polish_switch
    while True:
        res = 0.5 * float(np.max(np.abs(g)))
        if res <= switch * float(np.max(u)):
            wv = _try_polish(u, j, p, opts)
            if wv is not None:
                jw = functional_J(wv, p)
                history.append(jw)
                return wv, jw, float(np.max(np.abs(el_field(wv, p)))), it, history, True
            # back off: retry only after the defect drops another decade
            switch = 0.1 * res / float(np.max(u))
        if res <= opts.tol:
            return u, j, res, it, history, True
        if it >= opts.max_iter:
            return u, j, res, it, history, False
        it += 1
        # Barzilai-Borwein trial step after the first iteration
        if u_prev is not None:
            du = u - u_prev
            dg = g - g_prev
            denom = float(np.dot(du, dg))
            if denom > 0:
                step = min(max(float(np.dot(du, du)) / denom, 1e-10), 1e10)
        gg = float(np.dot(g, g))
        s = step
        accepted = False
        while s > 1e-18:
            v = u - s * g
            if np.any(v < 0):
                v = np.abs(v)
            if np.any(v):
                try:
                    v = math.sqrt(nehari_project(v, p).t_star) * v
                except DegenerateNonlinearity:
                    s *= 0.5
                    continue
                jv = functional_J(v, p)
                if jv <= j - opts.armijo_c * s * gg:
                    accepted = True
                    break
            s *= 0.5
        if not accepted:
            # no decrease available at working precision
            return u, j, res, it, history, res <= opts.tol
        u_prev, g_prev = u, g
        u, j = v, jv
        g = -2.0 * el_field(u, p)
        history.append(j)


def ground_state(p: ModelParams, k: int, opts: Optional[SolverOptions] = None) -> GroundState:
    """Positive k-periodic ground state by multi-start projected descent.

    Raises
    ------
    InvalidK
        ``k < 3``.
    InvalidRegime
        Defocusing parameters (use :func:`nlhop.convergence.solve`).
    NoConvergence
        No start reached ``opts.tol``; ``best`` holds the best iterate.
    """
    opts = opts or SolverOptions()
    if k < 3:
        raise InvalidK(f"period k >= 3 required, got k={k}")
    if not p.focusing:
        raise InvalidRegime("ground_state expects focusing parameters; use convergence.solve for defocusing")
    results = []
    for index, u0 in enumerate(initial_guesses(k, opts.restarts, opts.seed)):
        u, j, res, iters, history, ok = _descend(u0, p, opts)
        results.append((index, u, j, res, iters, history, ok))
    converged = [r for r in results if r[6]]
    pool = converged or results
    best = min(pool, key=lambda r: r[2])
    ties = [r for r in pool if r[2] - best[2] <= 1e-10]
    index, u, j, res, iters, history, ok = min(ties, key=lambda r: (float(np.dot(r[1], r[1])), r[0]))
    gs = GroundState(
        field=RingField(u),
        params=p,
        objective=j,
        power=math.fsum(u * u),
        el_resid=res,
        nehari_resid=abs(functional_I(u, p)),
        iterations=iters,
        restarts=len(results) - 1,
        start_index=index,
        history=tuple(history),
    )
    if not converged:
        raise NoConvergence(f"no start reached tol={opts.tol:.1e}; best residual {res:.3e}", best=gs)
    return gs
