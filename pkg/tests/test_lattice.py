import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nlhop import InvalidK, InvalidRegime, ModelParams, Regime, RingField, WaveField
from nlhop.lattice import (
    el_field,
    el_residual,
    energy_parts,
    functional_I,
    functional_J,
    gradient_J,
    hopping_neighbors,
    hopping_sum,
    laplacian_apply,
    lp_norm,
    power_sum,
    reduced_J,
)
from oracles import ring_I, ring_J

P = ModelParams(alpha=1.0, beta=1.0, sigma=1.0, omega=-1.0)

fields = st.integers(3, 24).flatmap(
    lambda k: arrays(np.float64, k, elements=st.floats(-2, 2, allow_nan=False))
)


# ---- laplacian ---------------------------------------------------------------

def test_laplacian_kills_constants():
    out = laplacian_apply(RingField.constant(7, 2.5))
    assert isinstance(out, RingField)
    np.testing.assert_array_equal(out.values, np.zeros(7))


def test_laplacian_single_site_k4():
    u = RingField.delta(4)
    np.testing.assert_array_equal(u.indices, [-2, -1, 0, 1])
    np.testing.assert_array_equal(laplacian_apply(u).values, [0, 1, -2, 1])


def test_laplacian_staggered_eigenvector():
    u = RingField.from_function(10, lambda l: (-1) ** l)
    np.testing.assert_allclose(laplacian_apply(u).values, -4 * u.values, atol=0)


def test_laplacian_on_wavefield_keeps_type():
    psi = WaveField(np.exp(1j * np.arange(5)))
    out = laplacian_apply(psi)
    assert isinstance(out, WaveField)


# ---- hopping -----------------------------------------------------------------

def test_hopping_constant():
    np.testing.assert_array_equal(hopping_neighbors(RingField.constant(5, 1.0)).values, 2.0)


def test_hopping_single_site_k4():
    # sites (-2, -1, 0, 1): only the two neighbours of site 0 see it
    np.testing.assert_array_equal(hopping_neighbors(RingField.delta(4)).values, [0, 1, 0, 1])


def test_hopping_alternating():
    u = RingField.from_function(6, lambda l: (-1) ** l)
    np.testing.assert_array_equal(hopping_neighbors(u).values, 2.0)


def test_hopping_of_wavefield_is_real():
    psi = WaveField(1j * np.ones(4))
    out = hopping_neighbors(psi)
    assert isinstance(out, RingField)
    np.testing.assert_allclose(out.values, 2.0)


# ---- functionals -------------------------------------------------------------

def test_functionals_vanish_at_zero():
    z = RingField.zeros(6)
    assert functional_J(z, P) == 0.0
    assert functional_I(z, P) == 0.0


def test_functionals_constant_k4():
    u = RingField.constant(4, 1.0)
    q, a, b = energy_parts(u, P)
    assert (q, a, b) == (4.0, 4.0, 4.0)
    assert functional_J(u, P) == pytest.approx(-2.0, abs=1e-14)
    assert functional_I(u, P) == pytest.approx(-8.0, abs=1e-14)


def test_functionals_single_site_k8():
    u = RingField.delta(8, value=math.sqrt(3.0))
    assert functional_J(u, P) == pytest.approx(4.5, abs=1e-14)
    assert functional_I(u, P) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(fields, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_functionals_match_loop_oracle(u, sigma):
    p = ModelParams(alpha=0.7, beta=1.3, sigma=sigma, omega=-0.4)
    scale = 1.0 + float(np.sum(np.abs(u)) ** 4)
    assert abs(functional_J(u, p) - ring_J(list(u), 0.7, 1.3, sigma, -0.4)) <= 1e-12 * scale
    assert abs(functional_I(u, p) - ring_I(list(u), 0.7, 1.3, sigma, -0.4)) <= 1e-12 * scale


def test_fractional_sigma_handles_zero_sites():
    u = np.array([0.0, 0.5, -1.2, 0.0, 2.0])
    assert power_sum(u, 1.5) == pytest.approx(sum(abs(x) ** 5 for x in u), rel=1e-14)


def test_hopping_sum_counts_each_bond_once():
    u = np.array([1.0, 2.0, 3.0])
    assert hopping_sum(u) == pytest.approx(1 * 4 + 4 * 9 + 9 * 1)


# ---- gradient and EL residual ------------------------------------------------

def test_gradient_zero_at_zero():
    np.testing.assert_array_equal(gradient_J(RingField.zeros(5), P).values, 0.0)


@pytest.mark.parametrize("k", [4, 8, 16])
@pytest.mark.parametrize("sigma", [1.0, 2.0, 2.5])
def test_gradient_matches_central_differences(k, sigma, rng):
    p = ModelParams(alpha=1.0, beta=1.0, sigma=sigma, omega=-1.0)
    h = 1e-5
    for _ in range(12):
        u = rng.uniform(-1.0, 1.0, size=k)
        g = gradient_J(u, p)
        fd = np.empty(k)
        for i in range(k):
            e = np.zeros(k)
            e[i] = h
            fd[i] = (functional_J(u + e, p) - functional_J(u - e, p)) / (2 * h)
        assert np.max(np.abs(g - fd)) <= 1e-6 * np.max(np.abs(g))


def test_gradient_is_minus_twice_el_field(rng):
    u = rng.normal(size=9)
    np.testing.assert_allclose(gradient_J(u, P), -2.0 * el_field(u, P), rtol=0, atol=0)


def test_el_residual_zero_field():
    assert el_residual(RingField.zeros(8), P) == 0.0


def test_el_residual_single_site_not_a_solution():
    u = RingField.delta(8, value=math.sqrt(3.0))
    f = el_field(u, P)
    # neighbours of the excited site only feel it through the Laplacian
    assert f.at(1) == pytest.approx(math.sqrt(3.0))
    assert f.at(-1) == pytest.approx(math.sqrt(3.0))
    assert el_residual(u, P) > 0


# ---- norms -------------------------------------------------------------------

@pytest.mark.parametrize("p", [1, 2, 3.5, math.inf])
def test_lp_norm_unit_vector(p):
    assert lp_norm(RingField.delta(6), p) == 1.0


def test_lp_norm_constant():
    assert lp_norm(RingField.constant(4, 1.0), 2) == pytest.approx(2.0)


@settings(max_examples=100, deadline=None)
@given(fields, st.floats(1, 6), st.floats(0, 6))
def test_lp_norm_monotone(u, p, dq):
    assert lp_norm(u, p + dq) <= lp_norm(u, p) * (1 + 1e-12) + 1e-300


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(ValueError):
        lp_norm(np.ones(3), 0.5)


# ---- structural properties ---------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(fields, st.integers(-30, 30))
def test_stencils_commute_with_shifts(u, s):
    f = RingField(u)
    np.testing.assert_allclose(laplacian_apply(f.shift(s)).values, laplacian_apply(f).shift(s).values,
                               atol=1e-15)
    np.testing.assert_allclose(hopping_neighbors(f.shift(s)).values, hopping_neighbors(f).shift(s).values,
                               atol=1e-15)
    np.testing.assert_allclose(el_field(f.shift(s), P).values, el_field(f, P).shift(s).values,
                               atol=1e-13)
    assert functional_J(f.shift(s), P) == pytest.approx(functional_J(f, P), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(fields)
def test_spectral_bound(u):
    kin = -float(np.dot(laplacian_apply(u), u))
    n2 = float(np.dot(u, u))
    assert -1e-12 * (1 + n2) <= kin <= 4 * n2 + 1e-12 * (1 + n2)


@settings(max_examples=100, deadline=None)
@given(fields, st.floats(0.01, 10), st.sampled_from([1.0, 2.0, 1.7]))
def test_scaling_identities(u, t, sigma):
    p = ModelParams(alpha=1.0, beta=0.5, sigma=sigma, omega=-2.0)
    q, a, b = energy_parts(u, p)
    v = math.sqrt(t) * u
    scale = 1 + t ** (sigma + 1) * (q + a + b)
    i_closed = t * q - 2 * t * t * p.alpha * a - t ** (sigma + 1) * p.beta * b
    j_closed = t * q - t * t * p.alpha * a - t ** (sigma + 1) * p.beta * b / (sigma + 1)
    assert abs(functional_I(v, p) - i_closed) <= 1e-12 * scale
    assert abs(functional_J(v, p) - j_closed) <= 1e-12 * scale


def test_reduced_form_on_manifold(rng):
    from nlhop import nehari_project

    for sigma in (1.0, 2.0):
        p = ModelParams(alpha=1.0, beta=1.0, sigma=sigma, omega=-1.0)
        for _ in range(50):
            u = rng.uniform(0.0, 1.0, size=12)
            v = math.sqrt(nehari_project(u, p).t_star) * u
            n2 = float(np.dot(v, v))
            assert abs(functional_I(v, p)) <= 1e-10 * (1 + n2)
            assert abs(functional_J(v, p) - reduced_J(v, p)) <= 1e-8 * (1 + n2)


# ---- types -------------------------------------------------------------------

def test_ring_field_invariants():
    with pytest.raises(InvalidK):
        RingField([1.0, 2.0])
    with pytest.raises(ValueError):
        RingField([1.0, np.nan, 2.0])
    with pytest.raises(ValueError):
        RingField(np.ones((2, 3)))
    u = RingField([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_ring_field_indexing():
    u = RingField.from_function(5, lambda l: 10 * l)
    np.testing.assert_array_equal(u.indices, [-2, -1, 0, 1, 2])
    assert u.at(0) == 0 and u.at(2) == 20 and u.at(3) == -20
    assert u.shift(1).at(0) == 10
    assert RingField.from_function(4, lambda l: l).indices.tolist() == [-2, -1, 0, 1]


@pytest.mark.parametrize(
    "kwargs, name",
    [
        (dict(omega=1.0), "omega"),
        (dict(alpha=-1.0), "alpha"),
        (dict(beta=0.0), "beta"),
        (dict(sigma=0.5), "sigma"),
        (dict(alpha=-1, beta=-1, omega=3.0, regime="defocusing"), "omega"),
        (dict(alpha=1, beta=-1, omega=5.0, regime="defocusing"), "alpha"),
    ],
)
def test_model_params_validation(kwargs, name):
    with pytest.raises(InvalidRegime, match=name):
        ModelParams(**kwargs)


def test_model_params_regime_from_string():
    p = ModelParams(alpha=-1, beta=-1, omega=5, regime="defocusing")
    assert p.regime is Regime.DEFOCUSING and not p.focusing
