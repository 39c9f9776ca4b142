import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lfblood.model import Form, VesselParams, make_vessel_params
from lfblood.physics import (char_speeds, char_speeds_state, dpressure, flux, flux_flow,
                             flux_velocity, lambda_bound, pressure, pressure_antiderivative,
                             pressure_inverse, sound_speed_sq, source, total_pressure,
                             viscous_source)

A0 = 6.6


def vessel(alpha=1.0, Pext=0.0, mu=0.0):
    return make_vessel_params(E=2.43e6, h0=0.26, nu=0.5, A0=A0, rho=1.06, alpha=alpha,
                              Pext=Pext, mu=mu)


def fd_jacobian(F, U, h=1e-6):
    J = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h * max(1.0, abs(U[k]))
        J[:, k] = (F(U + e) - F(U - e)) / (2 * e[k])
    return J


# -- pressure law --------------------------------------------------------------

def test_pressure_at_reference_area():
    p = vessel(Pext=250.0)
    assert pressure(A0, p) == 250.0


def test_pressure_at_four_A0():
    p = vessel(Pext=10.0)
    assert pressure(4 * A0, p) == pytest.approx(10.0 + p.beta * math.sqrt(A0), rel=1e-14)


def test_pressure_small_displacement():
    p = vessel()
    A = 6.6 * 1.01
    assert pressure(A, p) == pytest.approx(p.beta * (math.sqrt(6.666) - math.sqrt(6.6)),
                                           rel=1e-12)


def test_pressure_rejects_nonpositive_area():
    with pytest.raises(ValueError):
        pressure(0.0, vessel())
    with pytest.raises(ValueError):
        pressure(np.array([1.0, -1.0]), vessel())


def test_pressure_inverse_examples():
    p = vessel(Pext=30.0)
    assert pressure_inverse(30.0, p) == pytest.approx(A0, rel=1e-14)
    assert pressure_inverse(30.0 + p.beta * math.sqrt(A0), p) == pytest.approx(4 * A0, rel=1e-14)


def test_pressure_inverse_below_collapse():
    p = vessel()
    with pytest.raises(ValueError):
        pressure_inverse(-p.beta * math.sqrt(A0) - 1.0, p)
    with pytest.raises(ValueError):
        pressure_inverse(1.0, VesselParams(A0=1.0, beta=0.0))


@given(st.floats(0.05, 30.0))
def test_pressure_inverse_round_trip_area(A):
    p = vessel(Pext=100.0)
    assert pressure_inverse(pressure(A, p), p) == pytest.approx(A, rel=1e-12)


@given(st.floats(-5e5, 5e5))
def test_pressure_inverse_round_trip_pressure(pv):
    p = vessel()
    if pv <= -p.beta * math.sqrt(A0):
        return
    assert pressure(pressure_inverse(pv, p), p) == pytest.approx(pv, rel=1e-9, abs=1e-6)


def test_dpressure_matches_difference():
    p = vessel()
    A, h = 7.3, 1e-5
    fd = (pressure(A + h, p) - pressure(A - h, p)) / (2 * h)
    assert dpressure(A, p) == pytest.approx(fd, rel=1e-8)


# -- antiderivative and fluxes -------------------------------------------------------

def test_antiderivative_at_reference():
    p = vessel(Pext=17.0)
    assert pressure_antiderivative(A0, p) == pytest.approx(A0 * 17.0, rel=1e-14)


def test_antiderivative_at_four_A0():
    p = vessel()
    expected = 5.0 / 3.0 * p.beta * A0 ** 1.5
    assert pressure_antiderivative(4 * A0, p) == pytest.approx(expected, rel=1e-13)


@given(st.floats(0.5 * A0, 2 * A0))
def test_antiderivative_derivative_is_pressure(A):
    p = vessel(Pext=500.0)
    h = 1e-6 * A
    fd = (pressure_antiderivative(A + h, p) - pressure_antiderivative(A - h, p)) / (2 * h)
    assert fd == pytest.approx(pressure(A, p), rel=1e-6)


def test_flux_flow_rest_state():
    np.testing.assert_array_equal(flux_flow([A0, 0.0], vessel()), [0.0, 0.0])


def test_flux_flow_reference_area_moving():
    F = flux_flow([A0, 12.0], vessel())
    np.testing.assert_allclose(F, [12.0, 144.0 / A0], rtol=1e-14, atol=1e-12)


@given(A=st.floats(1.0, 20.0), Q=st.floats(-500, 500), Pext=st.floats(-1e3, 1e3))
def test_flux_flow_matches_quadrature(A, Q, Pext):
    p = vessel(Pext=Pext)
    # A p - P with P from a Gauss-Legendre quadrature of p over [A0, A]
    x, w = np.polynomial.legendre.leggauss(20)
    s = 0.5 * (A - A0) * x + 0.5 * (A + A0)
    P = A0 * Pext + 0.5 * (A - A0) * np.sum(w * pressure(s, p))
    F2 = Q * Q / A + (A * pressure(A, p) - P) / p.rho
    assert flux_flow([A, Q], p)[1] == pytest.approx(F2, rel=1e-9, abs=1e-6)


def test_flux_velocity_rest_state():
    np.testing.assert_array_equal(flux_velocity([A0, 0.0], vessel()), [0.0, 0.0])


@given(A=st.floats(0.5, 20.0), u=st.floats(-200, 200))
def test_flux_forms_agree_in_mass(A, u):
    p = vessel()
    assert flux_velocity([A, u], p)[0] == flux_flow([A, A * u], p)[0]


@given(A=st.floats(1.0, 20.0), u=st.floats(-200, 200))
def test_flux_velocity_momentum_derivative(A, u):
    p = vessel()
    h = 1e-6 * A
    fd = (flux_velocity([A + h, u], p)[1] - flux_velocity([A - h, u], p)[1]) / (2 * h)
    assert fd == pytest.approx(dpressure(A, p) / p.rho, rel=1e-6)


def test_flux_velocity_requires_flat_profile():
    with pytest.raises(ValueError):
        flux_velocity([1.0, 1.0], vessel(alpha=1.1))


def test_flux_dispatch(params):
    U = np.array([[6.0, 7.0], [1.0, 2.0]])
    np.testing.assert_array_equal(flux(U, params), flux_flow(U, params))
    np.testing.assert_array_equal(flux(U, params, Form.VELOCITY), flux_velocity(U, params))


# -- source --------------------------------------------------------------------------

def test_source_vanishes_without_viscosity():
    assert viscous_source(3.0, 10.0, vessel(alpha=1.1)) == 0.0


def test_source_vanishes_without_flow():
    assert viscous_source(3.0, 0.0, vessel(alpha=1.1, mu=0.04)) == 0.0


def test_source_parabolic_profile():
    # psi = 2 corresponds to alpha = 4/3
    p = make_vessel_params(E=1.0, h0=1.0, nu=0.0, A0=1.0, rho=1.0, alpha=4.0 / 3.0, mu=1.0)
    assert p.psi == pytest.approx(2.0)
    assert viscous_source(math.pi, 1.0, p) == pytest.approx(-8.0, rel=1e-12)


def test_flat_profile_viscosity_rejected():
    with pytest.raises(ValueError):
        viscous_source(1.0, 1.0, vessel(alpha=1.0, mu=0.04))


def test_source_vector_forms():
    p = vessel(alpha=1.1, mu=0.04)
    S = source(np.array([5.0, 20.0]), p)
    assert S[0] == 0.0 and S[1] == pytest.approx(viscous_source(5.0, 20.0, p))
    Sv = source(np.array([5.0, 4.0]), p, Form.VELOCITY)
    assert Sv[1] == pytest.approx(S[1] / 5.0)


# -- characteristic speeds -----------------------------------------------------------------

def test_sound_speed_baseline():
    lo, hi = char_speeds(A0, 0.0, vessel())
    assert hi == pytest.approx(523.6, abs=0.05)
    assert lo == -hi


@given(A=st.floats(1.0, 20.0), Q=st.floats(-1e3, 1e3))
def test_flat_profile_speeds(A, Q):
    p = vessel()
    c = math.sqrt(p.beta * math.sqrt(A) / (2 * p.rho))
    lo, hi = char_speeds(A, Q, p)
    assert lo == pytest.approx(Q / A - c, rel=1e-12, abs=1e-9)
    assert hi == pytest.approx(Q / A + c, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 1.1])
@given(A=st.floats(2.0, 15.0), Q=st.floats(-800, 800))
def test_speeds_are_jacobian_eigenvalues(alpha, A, Q):
    p = vessel(alpha=alpha)
    J = fd_jacobian(lambda U: flux_flow(U, p), np.array([A, Q]))
    ev = np.sort(np.linalg.eigvals(J).real)
    lo, hi = char_speeds(A, Q, p)
    np.testing.assert_allclose([lo, hi], ev, rtol=1e-6)


def test_velocity_form_speeds_match():
    p = vessel()
    lo, hi = char_speeds_state(np.array([5.0, 3.0]), p, Form.VELOCITY)
    assert (lo, hi) == char_speeds(5.0, 15.0, p)


def test_literal_speed_divides_by_A0():
    p = vessel()
    assert sound_speed_sq(4.0, p, literal=True) == pytest.approx(sound_speed_sq(4.0, p) / A0)


def test_total_pressure():
    p = vessel(alpha=1.1)
    assert total_pressure(5.0, 10.0, p) == pytest.approx(
        0.5 * 1.1 * 1.06 * 4.0 + pressure(5.0, p), rel=1e-14)


def test_lambda_bound_rest_cell():
    assert lambda_bound([np.array([A0, 0.0])], vessel()) == pytest.approx(523.6, abs=0.05)


def test_lambda_bound_monotone_in_area():
    p = vessel()
    base = lambda_bound([np.array([[A0], [0.0]])], p)
    more = lambda_bound([np.array([[A0, 8.0], [0.0, 0.0]])], p)
    assert more > base


def test_lambda_bound_is_max_over_edges():
    p1 = vessel()
    p2 = p1.with_changes(E=3 * p1.E)
    U = np.array([A0, 0.0])
    both = lambda_bound([U, U], [p1, p2])
    assert both == max(lambda_bound([U], p1), lambda_bound([U], p2))


def test_lambda_bound_velocity_states():
    p = vessel()
    assert lambda_bound([(np.array([5.0, 3.0]), Form.VELOCITY)], p) == pytest.approx(
        char_speeds(5.0, 15.0, p)[1])
