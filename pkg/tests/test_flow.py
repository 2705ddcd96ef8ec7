import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magflow.errors import EndpointSingularityError, PoleError, PoleEscape
from magflow.flow import (PhaseState, circle_state, energy, hamiltonian_rhs, integrate, omega,
                          partial_increment, pole_limit_model, rotation_increment, stability_probe)
from magflow.singularity import effective_potential


def state_at(pair, h, k, r0):
    U = float(effective_potential(pair, k, r0, 0).value)
    return PhaseState(np.sqrt(2 * (h - U)), k, r0, 0.0)


def test_rhs_and_pole_guard(pair_e1):
    s = PhaseState(0.3, -1.2, 1.0)
    d = hamiltonian_rhs(pair_e1, s)
    assert d.K == 0.0 and d.r == 0.3
    U = lambda r: float(energy(pair_e1, 0.0, -1.2, r))
    assert d.p_r == pytest.approx(-(U(1 + 1e-6) - U(1 - 1e-6)) / 2e-6, rel=1e-7)
    assert d.phi == pytest.approx((-1.2 + np.cos(1.0)) / np.sin(1.0) ** 2)
    with pytest.raises(PoleError):
        hamiltonian_rhs(pair_e1, PhaseState(0.0, -1.0, 1e-8))


def test_energy_drift_is_second_order(pair_e2):
    s0 = state_at(pair_e2, 0.4, -0.2, 1.0)
    drift = [integrate(pair_e2, s0, 40.0, dt).max_dH for dt in (0.02, 0.01, 0.005)]
    assert drift[2] < 1e-5
    for a, b in zip(drift, drift[1:]):
        assert 3.5 < a / b < 4.5


def test_momentum_is_conserved(pair_e1):
    tr = integrate(pair_e1, state_at(pair_e1, 0.5, -1.2, 0.8), 20.0, 0.01, record_every=10)
    assert np.all(tr.K == -1.2) and tr.max_dK == 0.0
    assert len(tr.t) == 201 and tr.t[-1] == pytest.approx(20.0)


def test_circle_stays_put(pair_e1):
    r0 = 1.0
    tr = integrate(pair_e1, circle_state(pair_e1, r0), 10.0, 0.01)
    assert np.max(np.abs(tr.r - r0)) < 1e-12
    # phi' = (k - Lambda)/f^2 = -1/cos(r0) on E1
    assert tr.phi[-1] == pytest.approx(-10.0 / np.cos(r0), rel=1e-12)


def test_pole_escape(pair_e1):
    # K = Lambda(0): the potential is finite at r = 0 and the orbit runs into the pole
    with pytest.raises(PoleEscape) as info:
        integrate(pair_e1, PhaseState(-1.0, -1.0, 1.0), 20.0, 0.01)
    assert info.value.exit_code == 4


def test_omega_is_angular_velocity_on_circle(pair_e1, pair_e2):
    assert omega(pair_e1, np.pi / 4) == pytest.approx(-np.sqrt(2.0), rel=1e-12)
    tr = integrate(pair_e2, circle_state(pair_e2, 1.0), 5.0, 0.01)
    assert tr.phi[-1] == pytest.approx(5.0 * omega(pair_e2, 1.0), rel=1e-10)


def test_stability_probes(pair_e1, pair_e2):
    p = stability_probe(pair_e1, np.pi / 4)
    assert p.verdict == p.expected == "Elliptic"
    assert p.rate == pytest.approx(np.sqrt(2.0), rel=1e-4)
    p = stability_probe(pair_e2, 2.68)
    assert p.verdict == p.expected == "Hyperbolic"
    assert p.rate == pytest.approx(np.sqrt(0.0128755), rel=2e-3)
    assert p.r2 > 0.99


def test_rotation_increment_e1(pair_e1):
    (res,) = rotation_increment(pair_e1, 0.5, -1.2)
    assert res.topology == "Annulus"
    assert res.value == pytest.approx(-2 * np.pi, abs=1e-8)


def radial_period_advance(pair, h, k, r0, dt=2e-4):
    """Phase advance of phi over one radial period, from the integrator."""
    tr = integrate(pair, state_at(pair, h, k, r0), 60.0, dt)
    # r0 is a turning point: p_r changes sign from negative to positive once per period
    i = np.flatnonzero((tr.p_r[:-1] < 0) & (tr.p_r[1:] >= 0))
    j = i[0]
    s = tr.p_r[j] / (tr.p_r[j] - tr.p_r[j + 1])
    t_ret = tr.t[j] + s * dt
    phi_ret = tr.phi[j] + s * (tr.phi[j + 1] - tr.phi[j])
    return phi_ret, t_ret


def test_rotation_increment_matches_integrator(pair_e2):
    from magflow.molecule import motion_domain
    h, k = 0.3, -0.4
    results = rotation_increment(pair_e2, h, k)
    ann = [x for x in results if x.topology == "Annulus"]
    assert ann
    for res in ann:
        phi, _ = radial_period_advance(pair_e2, h, k, res.r_lo + 1e-12)
        assert phi == pytest.approx(res.value, abs=1e-5)
    assert len(results) == len(motion_domain(pair_e2, h, k))


@pytest.mark.parametrize("h", [0.5, 12.5])
def test_partial_increment_approaches_flat_model(pair_e1, h):
    errs = []
    for eps in (1e-3, 1e-4, 1e-5):
        v, _ = partial_increment(pair_e1, h, eps)
        errs.append(abs(v - pole_limit_model(h, eps)))
        vm, _ = partial_increment(pair_e1, h, -eps)
        assert np.sign(vm) == -1.0
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_partial_increment_far_pole(pair_e1):
    v0, _ = partial_increment(pair_e1, 0.5, 1e-4, pole=0.0)
    # Lambda(L) = 1 with the orientation reversed at the far end
    vL, _ = partial_increment(pair_e1, 0.5, -1e-4, pole=np.pi)
    assert abs(vL) == pytest.approx(abs(v0), rel=1e-6)


def test_partial_increment_forbidden(pair_e1):
    with pytest.raises(EndpointSingularityError):
        partial_increment(pair_e1, 1e-9, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(1e-6, 1e-2))
def test_flat_model_range(h, eps):
    if eps ** 0.75 * np.sqrt(2 * h) / eps >= 1:
        v = pole_limit_model(h, eps)
        assert 0 <= v < np.pi
        assert pole_limit_model(h, -eps) == -v


def test_csv_columns(pair_e1):
    tr = integrate(pair_e1, circle_state(pair_e1, 1.0, 0.01), 1.0, 0.1)
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["t", "p_r", "K", "r", "phi", "H"]
    assert len(rows) == 12
    back = np.array(rows[1:], dtype=float)
    np.testing.assert_array_equal(back[:, 3], tr.r)
    np.testing.assert_array_equal(back[:, 5], tr.H)
