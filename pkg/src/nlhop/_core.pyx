# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same API as ``_core_py``."""
import numpy as np

from libc.math cimport pow, fabs, isfinite, sqrt, powl, fabsl, sqrtl


cdef inline double _abs_pow(double m2, double sigma) nogil:
    if sigma == 1.0:
        return m2
    if sigma == 2.0:
        return m2 * m2
    if m2 <= 0.0:
        return 0.0
    return pow(m2, sigma)


# Neumaier compensated accumulation: s is the running sum, c the compensation.
cdef inline void _acc(double *s, double *c, double x) nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef void _sums_c(const double complex[::1] psi, double sigma,
                  double *kin, double *n2, double *a, double *b) nogil:
    cdef Py_ssize_t k = psi.shape[0], l, lp
    cdef double s0 = 0, c0 = 0, s1 = 0, c1 = 0, s2 = 0, c2 = 0, s3 = 0, c3 = 0
    cdef double dr, di, m2, m2p
    for l in range(k):
        lp = l + 1 if l + 1 < k else 0
        dr = psi[lp].real - psi[l].real
        di = psi[lp].imag - psi[l].imag
        m2 = psi[l].real * psi[l].real + psi[l].imag * psi[l].imag
        m2p = psi[lp].real * psi[lp].real + psi[lp].imag * psi[lp].imag
        _acc(&s0, &c0, dr * dr + di * di)
        _acc(&s1, &c1, m2)
        _acc(&s2, &c2, m2 * m2p)
        _acc(&s3, &c3, _abs_pow(m2, sigma) * m2)
    kin[0] = s0 + c0
    n2[0] = s1 + c1
    a[0] = s2 + c2
    b[0] = s3 + c3


def sums_real(const double[::1] u, double sigma):
    cdef Py_ssize_t k = u.shape[0], l, lp
    cdef double s0 = 0, c0 = 0, s1 = 0, c1 = 0, s2 = 0, c2 = 0, s3 = 0, c3 = 0
    cdef double d, m2, m2p
    with nogil:
        for l in range(k):
            lp = l + 1 if l + 1 < k else 0
            d = u[lp] - u[l]
            m2 = u[l] * u[l]
            m2p = u[lp] * u[lp]
            _acc(&s0, &c0, d * d)
            _acc(&s1, &c1, m2)
            _acc(&s2, &c2, m2 * m2p)
            _acc(&s3, &c3, _abs_pow(m2, sigma) * m2)
    return (s0 + c0, s1 + c1, s2 + c2, s3 + c3)


def sums_complex(const double complex[::1] psi, double sigma):
    cdef double kin, n2, a, b
    with nogil:
        _sums_c(psi, sigma, &kin, &n2, &a, &b)
    return (kin, n2, a, b)


def el_field(const double[::1] u, double omega, double alpha, double beta,
             double sigma):
    cdef Py_ssize_t k = u.shape[0], l, lp, lm
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    cdef double x, up, um
    with nogil:
        for l in range(k):
            lp = l + 1 if l + 1 < k else 0
            lm = l - 1 if l > 0 else k - 1
            x = u[l]
            up = u[lp]
            um = u[lm]
            o[l] = ((omega - 2.0) * x + up + um
                    + alpha * x * (up * up + um * um)
                    + beta * _abs_pow(x * x, sigma) * x)
    return out


cdef void _rhs(const double complex[::1] psi, double complex[::1] out,
               double[::1] m2, double alpha, double beta, double sigma) nogil:
    cdef Py_ssize_t k = psi.shape[0], l, lp, lm
    cdef double complex z
    cdef double g
    for l in range(k):
        m2[l] = psi[l].real * psi[l].real + psi[l].imag * psi[l].imag
    for l in range(k):
        lp = l + 1 if l + 1 < k else 0
        lm = l - 1 if l > 0 else k - 1
        g = alpha * (m2[lp] + m2[lm]) + beta * _abs_pow(m2[l], sigma) - 2.0
        z = psi[lp] + psi[lm] + g * psi[l]
        # multiply by i
        out[l] = -z.imag + 1j * z.real


def flow_rhs(const double complex[::1] psi, double alpha, double beta, double sigma):
    cdef Py_ssize_t k = psi.shape[0]
    out = np.empty(k, dtype=np.complex128)
    m2 = np.empty(k, dtype=np.float64)
    cdef double complex[::1] o = out
    cdef double[::1] w = m2
    with nogil:
        _rhs(psi, o, w, alpha, beta, sigma)
    return out


cdef void _rhs_ld(const long double[::1] xr, const long double[::1] xi,
                  long double[::1] outr, long double[::1] outi, long double[::1] m2,
                  long double alpha, long double beta, double sigma) nogil:
    cdef Py_ssize_t k = xr.shape[0], l, lp, lm
    cdef long double g, zr, zi
    for l in range(k):
        m2[l] = xr[l] * xr[l] + xi[l] * xi[l]
    for l in range(k):
        lp = l + 1 if l + 1 < k else 0
        lm = l - 1 if l > 0 else k - 1
        if sigma == 1.0:
            g = alpha * (m2[lp] + m2[lm]) + beta * m2[l] - 2.0
        elif sigma == 2.0:
            g = alpha * (m2[lp] + m2[lm]) + beta * m2[l] * m2[l] - 2.0
        elif m2[l] > 0:
            g = alpha * (m2[lp] + m2[lm]) + beta * powl(m2[l], <long double>sigma) - 2.0
        else:
            g = alpha * (m2[lp] + m2[lm]) - 2.0
        zr = xr[lp] + xr[lm] + g * xr[l]
        zi = xi[lp] + xi[lm] + g * xi[l]
        outr[l] = -zi
        outi[l] = zr


cdef void _diag_ld(const long double[::1] xr, const long double[::1] xi,
                   const long double[::1] mod0, long double alpha, long double beta,
                   double sigma, double *pw, double *en, double *md) nogil:
    cdef Py_ssize_t k = xr.shape[0], l, lp
    cdef long double kin = 0, n2 = 0, a = 0, b = 0, dr, di, m2, m2p, dev, dmax = 0
    for l in range(k):
        lp = l + 1 if l + 1 < k else 0
        dr = xr[lp] - xr[l]
        di = xi[lp] - xi[l]
        m2 = xr[l] * xr[l] + xi[l] * xi[l]
        m2p = xr[lp] * xr[lp] + xi[lp] * xi[lp]
        kin += dr * dr + di * di
        n2 += m2
        a += m2 * m2p
        if m2 > 0:
            b += powl(m2, <long double>sigma + 1.0)
        dev = fabsl(sqrtl(m2) - mod0[l])
        if dev > dmax:
            dmax = dev
    pw[0] = <double>n2
    en[0] = <double>(kin - alpha * a - beta / (<long double>sigma + 1.0) * b)
    md[0] = <double>dmax


def rk4_run(psi0, double alpha, double beta, double sigma, double dt,
            long nsteps, long sample_every):
    """RK4 with the state and stages carried in long double.

    Returns ``(psi_final, steps, power, energy, modulus_dev)``; ``psi_final``
    is a ``clongdouble`` array.
    """
    src = np.asarray(psi0, dtype=np.clongdouble)
    cdef Py_ssize_t k = src.shape[0], l
    cdef long double[::1] xr = np.ascontiguousarray(src.real, dtype=np.longdouble)
    cdef long double[::1] xi = np.ascontiguousarray(src.imag, dtype=np.longdouble)
    cdef long n, nsamp = nsteps // sample_every + 2, isamp = 0
    steps = np.zeros(nsamp, dtype=np.int64)
    power = np.zeros(nsamp)
    energy = np.zeros(nsamp)
    moddev = np.zeros(nsamp)
    cdef long long[::1] st = steps
    cdef double[::1] pw = power, en = energy, md = moddev
    cdef long double[::1] mod0 = np.empty(k, np.longdouble)
    cdef long double[::1] k1r = np.empty(k, np.longdouble), k1i = np.empty(k, np.longdouble)
    cdef long double[::1] k2r = np.empty(k, np.longdouble), k2i = np.empty(k, np.longdouble)
    cdef long double[::1] k3r = np.empty(k, np.longdouble), k3i = np.empty(k, np.longdouble)
    cdef long double[::1] k4r = np.empty(k, np.longdouble), k4i = np.empty(k, np.longdouble)
    cdef long double[::1] tr = np.empty(k, np.longdouble), ti = np.empty(k, np.longdouble)
    cdef long double[::1] m2 = np.empty(k, np.longdouble)
    cdef long double h = dt, half = (<long double>dt) / 2, sixth = (<long double>dt) / 6
    cdef long double al = alpha, be = beta
    cdef bint bad = False
    cdef long bad_step = -1

    with nogil:
        for l in range(k):
            mod0[l] = sqrtl(xr[l] * xr[l] + xi[l] * xi[l])
        st[0] = 0
        _diag_ld(xr, xi, mod0, al, be, sigma, &pw[0], &en[0], &md[0])
        isamp = 1
        for n in range(1, nsteps + 1):
            _rhs_ld(xr, xi, k1r, k1i, m2, al, be, sigma)
            for l in range(k):
                tr[l] = xr[l] + half * k1r[l]
                ti[l] = xi[l] + half * k1i[l]
            _rhs_ld(tr, ti, k2r, k2i, m2, al, be, sigma)
            for l in range(k):
                tr[l] = xr[l] + half * k2r[l]
                ti[l] = xi[l] + half * k2i[l]
            _rhs_ld(tr, ti, k3r, k3i, m2, al, be, sigma)
            for l in range(k):
                tr[l] = xr[l] + h * k3r[l]
                ti[l] = xi[l] + h * k3i[l]
            _rhs_ld(tr, ti, k4r, k4i, m2, al, be, sigma)
            for l in range(k):
                xr[l] = xr[l] + sixth * (k1r[l] + 2 * k2r[l] + 2 * k3r[l] + k4r[l])
                xi[l] = xi[l] + sixth * (k1i[l] + 2 * k2i[l] + 2 * k3i[l] + k4i[l])
                if not (isfinite(<double>xr[l]) and isfinite(<double>xi[l])):
                    bad = True
            if bad:
                bad_step = n
                break
            if n % sample_every == 0 or n == nsteps:
                st[isamp] = n
                _diag_ld(xr, xi, mod0, al, be, sigma, &pw[isamp], &en[isamp], &md[isamp])
                isamp += 1
    if bad:
        raise FloatingPointError(f"non-finite state at step {bad_step}")
    final = np.asarray(xr) + 1j * np.asarray(xi).astype(np.clongdouble)
    return (final, steps[:isamp].copy(), power[:isamp].copy(),
            energy[:isamp].copy(), moddev[:isamp].copy())
