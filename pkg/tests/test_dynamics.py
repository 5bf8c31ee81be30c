import numpy as np
import pytest

from nlhop import ModelParams, NonFinite, RingField, WaveField, evolve, flow_rhs, hamiltonian, power
from nlhop.dynamics import stable_dt
from nlhop.lattice import el_field

P = ModelParams()


def test_zero_state_is_fixed():
    tr = evolve(WaveField.zeros(6), P, dt=1e-2, t_end=1.0)
    np.testing.assert_array_equal(tr.final.values, 0)
    np.testing.assert_array_equal(tr.power, 0)


def test_rhs_of_stationary_state_is_rotation(gs16):
    # F(u) = 0 means Lap u + N(u) = -omega u, so dpsi/dt = -i omega psi
    psi = WaveField.from_real(gs16.field)
    np.testing.assert_allclose(flow_rhs(psi, P).values, -1j * P.omega * psi.values, atol=1e-8)


def test_linear_plane_wave():
    # without nonlinearity each Fourier mode rotates at its own frequency
    p = ModelParams(alpha=1e-300, beta=1e-300)
    k, q = 8, 2
    ls = np.arange(-(k // 2), k - k // 2)
    psi0 = 0.1 * np.exp(2j * np.pi * q * ls / k)
    lam = 2 - 2 * np.cos(2 * np.pi * q / k)
    tr = evolve(psi0, p, dt=1e-3, t_end=1.0)
    np.testing.assert_allclose(tr.final.values, psi0 * np.exp(-1j * lam * 1.0), atol=1e-12)


def test_stationary_state_keeps_modulus(gs16):
    tr = evolve(WaveField.from_real(gs16.field), P, dt=1e-3, t_end=1.0, sample_every=100)
    assert tr.times[-1] == pytest.approx(1.0)
    assert np.max(tr.modulus_dev) <= 1e-8
    # psi(t) = exp(-i omega t) u
    np.testing.assert_allclose(tr.final.values, gs16.field.values * np.exp(-1j * P.omega * 1.0),
                               atol=1e-8)


def test_conservation_generic_state(rng):
    psi0 = 0.6 * (rng.normal(size=12) + 1j * rng.normal(size=12))
    p = ModelParams(alpha=0.5, beta=1.0, sigma=1.5)
    tr = evolve(psi0, p, dt=5e-4, t_end=2.0, sample_every=50)
    assert tr.power_drift() <= 1e-10
    assert tr.energy_drift() <= 1e-8
    assert tr.power[0] == pytest.approx(power(psi0), rel=1e-13)
    assert tr.energy[0] == pytest.approx(hamiltonian(psi0, p), rel=1e-12)


def test_hamiltonian_gradient_generates_flow(rng):
    # i dpsi/dt = -dH/dpsi*: check the flow against numerical derivatives of H
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    h = 1e-6
    grad = np.empty(6, complex)
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        dre = (hamiltonian(psi + e, P) - hamiltonian(psi - e, P)) / (2 * h)
        dim = (hamiltonian(psi + 1j * e, P) - hamiltonian(psi - 1j * e, P)) / (2 * h)
        grad[j] = 0.5 * (dre + 1j * dim)
    np.testing.assert_allclose(1j * flow_rhs(psi, P), grad, atol=1e-7)


def test_energy_of_real_state_matches_functional(gs16):
    # H(u) = J(u) + omega |u|^2 for real u
    from nlhop import functional_J

    u = gs16.field
    assert hamiltonian(u, P) == pytest.approx(functional_J(u, P) + P.omega * gs16.power, rel=1e-12)


def test_sampling_grid():
    tr = evolve(0.5 * RingField.delta(5).values, P, dt=1e-2, t_end=0.25, sample_every=10)
    np.testing.assert_allclose(tr.times, [0.0, 0.1, 0.2, 0.25])
    assert len(list(tr.rows())) == 4


def test_dt_guard():
    psi = 3.0 * RingField.delta(5).values
    assert stable_dt(psi, P) < 0.01
    with pytest.raises(ValueError):
        evolve(psi, P, dt=0.01, t_end=0.1)
    evolve(psi, P, dt=0.01, t_end=0.02, check_dt=False)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        evolve(np.ones(4), P, dt=0.0)
    with pytest.raises(ValueError):
        evolve(np.ones(4), P, t_end=-1)
    with pytest.raises(ValueError):
        evolve(np.ones(4), P, sample_every=0)


def test_blowup_reported():
    with pytest.raises(NonFinite):
        evolve(np.full(4, 30.0 + 0j), P, dt=0.5, t_end=50.0, check_dt=False)


def test_el_field_vanishes_along_orbit(gs16):
    tr = evolve(WaveField.from_real(gs16.field), P, dt=1e-3, t_end=0.5, sample_every=500)
    phase = tr.final.values[8] / abs(tr.final.values[8])
    back = (tr.final.values / phase).real
    assert np.max(np.abs(el_field(back, P))) <= 1e-8
