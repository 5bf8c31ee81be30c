"""Independent reference computations used to freeze expected values.

Everything here is written with explicit loops over ring indices and avoids
the package's kernels, so a shared bug cannot make both sides agree.
"""
import math

import numpy as np
from scipy.optimize import minimize


def ring_J(u, alpha, beta, sigma, omega):
    k = len(u)
    q = sum((u[(i + 1) % k] - u[i]) ** 2 for i in range(k)) - omega * sum(x * x for x in u)
    a = sum(u[i] ** 2 * u[(i + 1) % k] ** 2 for i in range(k))
    b = sum(abs(x) ** (2 * sigma + 2) for x in u)
    return q - alpha * a - beta / (sigma + 1) * b


def ring_I(u, alpha, beta, sigma, omega):
    k = len(u)
    q = sum((u[(i + 1) % k] - u[i]) ** 2 for i in range(k)) - omega * sum(x * x for x in u)
    hop = sum(u[i] ** 2 * (u[(i + 1) % k] ** 2 + u[(i - 1) % k] ** 2) for i in range(k))
    b = sum(abs(x) ** (2 * sigma + 2) for x in u)
    return q - alpha * hop - beta * b


def bisect_decreasing(f, lo=0.0, hi=1.0, iters=200):
    """Root of a decreasing function with f(lo) > 0, by bracket doubling and bisection."""
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ray_scale(u, alpha, beta, sigma, omega):
    """t* with I(sqrt(t*) u) = 0, by bisection on I along the ray."""
    return bisect_decreasing(lambda t: ring_I([math.sqrt(t) * x for x in u], alpha, beta, sigma, omega) / t)


def brute_force_nehari_min(k, alpha, beta, sigma, omega, starts, seed=12345):
    """Minimum of J over the Nehari manifold by multi-start BFGS over directions.

    For sigma = 1 the ray scale has the closed form t* = Q / (2 alpha A + beta B),
    so the constrained problem becomes unconstrained in the direction w.
    """
    assert sigma == 1
    nxt = [(i + 1) % k for i in range(k)]

    def objective(w):
        wn = w[nxt]
        q = np.sum((wn - w) ** 2) - omega * np.sum(w * w)
        a = np.sum(w * w * wn * wn)
        b = np.sum(w**4)
        denom = 2 * alpha * a + beta * b
        if denom <= 0:
            return 1e300
        # J at the projected point sqrt(t*) w, with t* = q / denom
        t = q / denom
        return t * q - t * t * alpha * a - t * t * beta * b / 2

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(starts):
        w0 = rng.normal(size=k)
        res = minimize(objective, w0, method="BFGS", options={"gtol": 1e-10})
        best = min(best, res.fun)
    return best


def green_images(n, k, omega):
    """Ring Green function by summing line Green functions over periodic images."""
    s = 2 - omega
    r = (s - math.sqrt(s * s - 4)) / 2
    g0 = 1 / (1 / r - r)
    n = n % k
    # sum_j r^|n + jk| in closed form
    return g0 * (r**n + r ** (k - n)) / (1 - r**k)


def inverse_3x3(m):
    """Adjugate-formula inverse of a 3x3 matrix."""
    (a, b, c), (d, e, f), (g, h, i) = m
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    adj = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[x / det for x in row] for row in adj]
