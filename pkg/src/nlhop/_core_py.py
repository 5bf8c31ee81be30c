"""Pure numpy implementation of the hot kernels.

Mirrors the compiled ``_core`` extension function by function. Used when the
extension is not built or when ``NLHOP_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np


def _abs_pow(m2, sigma):
    # |u|^(2 sigma) from |u|^2, with 0^s := 0
    if sigma == 1.0:
        return m2
    if sigma == 2.0:
        return m2 * m2
    return np.power(m2, sigma)


def sums_real(u, sigma):
    """Return ``(kin, norm2, A, B)`` for a real ring field.

    ``kin`` is <-Lap u, u> = sum (u_{l+1} - u_l)^2, ``norm2`` the squared l2
    norm, ``A`` = sum u_l^2 u_{l+1}^2 and ``B`` = sum |u_l|^(2 sigma + 2).
    All four are accumulated with ``math.fsum``.
    """
    u = np.asarray(u, dtype=float)
    up = np.roll(u, -1)
    m2 = u * u
    return (
        math.fsum((up - u) ** 2),
        math.fsum(m2),
        math.fsum(m2 * np.roll(m2, -1)),
        math.fsum(_abs_pow(m2, sigma) * m2),
    )


def sums_complex(psi, sigma):
    """Complex analogue of :func:`sums_real` (moduli enter A and B)."""
    psi = np.asarray(psi, dtype=complex)
    d = np.roll(psi, -1) - psi
    m2 = psi.real**2 + psi.imag**2
    return (
        math.fsum(d.real**2 + d.imag**2),
        math.fsum(m2),
        math.fsum(m2 * np.roll(m2, -1)),
        math.fsum(_abs_pow(m2, sigma) * m2),
    )


def el_field(u, omega, alpha, beta, sigma):
    """omega u + Lap u + alpha u (T u) + beta |u|^(2 sigma) u, elementwise."""
    u = np.asarray(u, dtype=float)
    up = np.roll(u, -1)
    um = np.roll(u, 1)
    m2 = u * u
    return (
        (omega - 2.0) * u
        + up
        + um
        + alpha * u * (up * up + um * um)
        + beta * _abs_pow(m2, sigma) * u
    )


def flow_rhs(psi, alpha, beta, sigma):
    """i [Lap psi + alpha psi (T psi) + beta |psi|^(2 sigma) psi]."""
    psi = np.asarray(psi, dtype=complex)
    pp = np.roll(psi, -1)
    pm = np.roll(psi, 1)
    m2 = psi.real**2 + psi.imag**2
    m2p = np.roll(m2, -1)
    m2m = np.roll(m2, 1)
    return 1j * (
        pp + pm - 2.0 * psi + (alpha * (m2p + m2m) + beta * _abs_pow(m2, sigma)) * psi
    )


def _rhs_ld(psi, alpha, beta, sigma):
    m2 = psi.real * psi.real + psi.imag * psi.imag
    g = alpha * (np.roll(m2, -1) + np.roll(m2, 1)) + beta * _abs_pow(m2, sigma) - 2
    z = np.roll(psi, -1) + np.roll(psi, 1) + g * psi
    return 1j * z


def rk4_run(psi0, alpha, beta, sigma, dt, nsteps, sample_every):
    """Classical RK4 with the state and stages carried in long double.

    Returns ``(psi_final, steps, power, energy, modulus_dev)`` where
    ``psi_final`` is a ``clongdouble`` array and ``steps`` are the sampled
    step indices (always including 0 and ``nsteps``).
    """
    ld = np.longdouble
    psi = np.array(psi0, dtype=np.clongdouble)
    al, be, sg = ld(alpha), ld(beta), ld(sigma)
    mod0 = np.sqrt(psi.real**2 + psi.imag**2)
    steps, power, energy, moddev = [], [], [], []

    def record(n):
        m2 = psi.real**2 + psi.imag**2
        d = np.roll(psi, -1) - psi
        kin = np.sum(d.real**2 + d.imag**2)
        a = np.sum(m2 * np.roll(m2, -1))
        b = np.sum(_abs_pow(m2, sg) * m2)
        steps.append(n)
        power.append(float(np.sum(m2)))
        energy.append(float(kin - al * a - be / (sg + 1) * b))
        moddev.append(float(np.max(np.abs(np.sqrt(m2) - mod0))))

    record(0)
    h = ld(dt)
    half = h / 2
    sixth = h / 6
    for n in range(1, nsteps + 1):
        # overflow is reported below, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = _rhs_ld(psi, al, be, sg)
            k2 = _rhs_ld(psi + half * k1, al, be, sg)
            k3 = _rhs_ld(psi + half * k2, al, be, sg)
            k4 = _rhs_ld(psi + h * k3, al, be, sg)
            psi = psi + sixth * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(psi)):
            raise FloatingPointError(f"non-finite state at step {n}")
        if n % sample_every == 0 or n == nsteps:
            record(n)
    return (
        psi,
        np.asarray(steps, dtype=np.int64),
        np.asarray(power),
        np.asarray(energy),
        np.asarray(moddev),
    )
