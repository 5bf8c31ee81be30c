"""Compiled kernels against the numpy fallback."""
import os
import subprocess
import sys

import numpy as np
import pytest

from nlhop import _core_py

try:
    from nlhop import _core
except ImportError:  # extension not built
    _core = None

needs_ext = pytest.mark.skipif(_core is None, reason="compiled extension not built")


@needs_ext
@pytest.mark.parametrize("sigma", [1.0, 2.0, 1.5, 3.0])
def test_real_sums_agree(sigma, rng):
    for k in (3, 8, 33):
        u = rng.normal(size=k)
        np.testing.assert_allclose(_core.sums_real(u, sigma), _core_py.sums_real(u, sigma), rtol=1e-14)


@needs_ext
@pytest.mark.parametrize("sigma", [1.0, 2.0, 1.5])
def test_complex_sums_agree(sigma, rng):
    psi = rng.normal(size=17) + 1j * rng.normal(size=17)
    np.testing.assert_allclose(_core.sums_complex(psi, sigma), _core_py.sums_complex(psi, sigma),
                               rtol=1e-14)


@needs_ext
@pytest.mark.parametrize("sigma", [1.0, 2.0, 2.5])
def test_el_field_agrees(sigma, rng):
    u = rng.normal(size=12)
    np.testing.assert_allclose(_core.el_field(u, -1.3, 0.7, 1.1, sigma),
                               _core_py.el_field(u, -1.3, 0.7, 1.1, sigma), rtol=1e-13, atol=1e-14)


@needs_ext
def test_flow_rhs_agrees(rng):
    psi = rng.normal(size=10) + 1j * rng.normal(size=10)
    np.testing.assert_allclose(_core.flow_rhs(psi, 1.0, 0.5, 2.0), _core_py.flow_rhs(psi, 1.0, 0.5, 2.0),
                               rtol=1e-13, atol=1e-14)


@needs_ext
@pytest.mark.parametrize("sigma", [1.0, 1.5])
def test_rk4_agrees(sigma, rng):
    psi = 0.5 * (rng.normal(size=8) + 1j * rng.normal(size=8))
    a = _core.rk4_run(psi, 1.0, 1.0, sigma, 1e-3, 300, 50)
    b = _core_py.rk4_run(psi, 1.0, 1.0, sigma, 1e-3, 300, 50)
    assert a[0].dtype == np.clongdouble and b[0].dtype == np.clongdouble
    np.testing.assert_allclose(a[0].astype(complex), b[0].astype(complex), rtol=1e-14, atol=1e-15)
    np.testing.assert_array_equal(a[1], b[1])
    for x, y in zip(a[2:], b[2:]):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-15)


def test_sampling_includes_endpoints(core_module):
    _, steps, power, energy, moddev = core_module.rk4_run(np.ones(4, complex), 1.0, 1.0, 1.0,
                                                          1e-2, 25, 10)
    assert steps.tolist() == [0, 10, 20, 25]
    assert len(power) == len(energy) == len(moddev) == 4
    assert moddev[0] == 0.0


def test_rk4_reports_overflow(core_module):
    with pytest.raises(FloatingPointError):
        core_module.rk4_run(np.full(4, 1e3 + 0j), 1.0, 1.0, 1.0, 1.0, 50, 1)


def test_env_var_forces_fallback():
    env = dict(os.environ, NLHOP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import nlhop; print(nlhop.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_default_backend_is_compiled():
    import nlhop

    assert nlhop.BACKEND == "cython"


def test_fallback_solver_end_to_end():
    code = (
        "import nlhop;"
        "gs = nlhop.ground_state(nlhop.ModelParams(), 8);"
        "print(nlhop.BACKEND, repr(gs.objective), gs.el_resid)"
    )
    env = dict(os.environ, NLHOP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    backend, obj, res = out.stdout.split()
    assert backend == "python"
    import nlhop

    ref = nlhop.ground_state(nlhop.ModelParams(), 8)
    assert float(obj) == pytest.approx(ref.objective, abs=1e-12)
    assert float(res) <= 1e-8
