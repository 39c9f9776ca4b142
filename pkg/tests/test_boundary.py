import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lfblood.boundary import (LEFT, RIGHT, BoundaryError, Constant, EdgeTrace, HeartValve,
                              Neumann, NonReflecting, NonReflectingOrder2, PrescribedFlow,
                              PrescribedPressure, PrescribedVelocity, Reflecting, Sine,
                              Tabulated, boundary_from_flow, boundary_from_pressure,
                              boundary_from_velocity, boundary_states, edge_trace,
                              heart_valve, lax_curve_V, nonreflecting_left,
                              nonreflecting_order2, nonreflecting_residual,
                              nonreflecting_right, wall_states)
from lfblood.model import Form, equilibrium_state, make_vessel_params
from lfblood.physics import char_speeds, flux, lambda_bound, pressure
from lfblood.scheme import lf_interface_flux, step_limit

SIDES = [LEFT, RIGHT]


def vessel(alpha=1.0):
    return make_vessel_params(E=2.43e6, h0=0.26, nu=0.5, A0=6.6, rho=1.06, alpha=alpha)


def trace_of(U, params, U2=None, form=Form.FLOW):
    U = np.asarray(U, float)
    U2 = U if U2 is None else np.asarray(U2, float)
    return EdgeTrace(U, flux(U, params, form), U2, flux(U2, params, form))


def lam_for(trace, params):
    return 1.5 * lambda_bound([trace.U, trace.U2], params)


def lax_residual(st, trace, side, lam):
    expected = lax_curve_V(st.U, trace, side, lam)
    return np.abs(st.V - expected).max() / max(np.abs(expected).max(), 1.0)


areas = st.floats(4.0, 10.0)
flows = st.floats(-150.0, 150.0)


# -- time functions ----------------------------------------------------------

def test_time_functions():
    assert Constant(3.0)(17.0) == 3.0
    s = Sine(6e4, 5 * math.pi)
    assert s(0.1) == pytest.approx(6e4)
    assert s(0.0) == 0.0
    tab = Tabulated([0.0, 1.0, 2.0], [0.0, 10.0, 0.0])
    assert tab(0.5) == 5.0 and tab(1.5) == 5.0
    assert tab(-1.0) == 0.0 and tab(3.0) == 0.0


def test_tabulated_validation():
    with pytest.raises(ValueError):
        Tabulated([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        Tabulated([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        Tabulated([0.0, 1.0], [1.0, float("nan")])


# -- non-reflecting relation ---------------------------------------------------

def test_nonreflecting_without_datum_copies_trace():
    p = vessel()
    U = np.array([7.0, 12.0])
    np.testing.assert_array_equal(nonreflecting_left(U, p), U)
    np.testing.assert_array_equal(nonreflecting_right(U, p), U)


def test_nonreflecting_rest_state():
    p = vessel()
    np.testing.assert_allclose(nonreflecting_left([p.A0, 0.0], p, A_L=p.A0), [p.A0, 0.0])
    np.testing.assert_allclose(nonreflecting_right([p.A0, 0.0], p, A_R=p.A0), [p.A0, 0.0])


def test_nonreflecting_nonpositive_trace():
    with pytest.raises(ValueError):
        nonreflecting_left([0.0, 1.0], vessel())


@given(areas, flows, areas, st.sampled_from([1.0, 1.1]))
def test_nonreflecting_imposed_area_residual(A1, Q1, A_b, alpha):
    p = vessel(alpha)
    for side, fn in ((LEFT, nonreflecting_left), (RIGHT, nonreflecting_right)):
        try:
            U_b = fn([A1, Q1], p, A_b)
        except BoundaryError:
            continue
        lo, hi = char_speeds(U_b[0], U_b[1], p)
        speed = hi if side == LEFT else lo
        resid = (Q1 - U_b[1]) - speed * (A1 - U_b[0])
        assert abs(resid) <= 1e-12 * (abs(Q1) + abs(U_b[1]) + abs(speed * (A1 - U_b[0])) + 1)


# -- prescribed pressure -------------------------------------------------------

@pytest.mark.parametrize("side", SIDES)
def test_pressure_consistent_datum(side):
    p = vessel()
    tr = trace_of([7.2, 30.0], p)
    lam = lam_for(tr, p)
    st_ = boundary_from_pressure(pressure(7.2, p), tr, side, lam, p)
    np.testing.assert_allclose(st_.U, tr.U, rtol=1e-12)
    np.testing.assert_allclose(st_.V, tr.V, rtol=1e-12)


def test_pressure_pulse_enters_as_inflow():
    p = vessel()
    tr = trace_of([p.A0, 0.0], p)
    st_ = boundary_from_pressure(Sine(6e4, 5 * math.pi)(0.05), tr, LEFT, lam_for(tr, p), p)
    assert st_.U[0] > p.A0
    assert st_.U[1] > 0


def test_pressure_pulse_at_right_end_flows_leftwards():
    p = vessel()
    tr = trace_of([p.A0, 0.0], p)
    st_ = boundary_from_pressure(4e4, tr, RIGHT, lam_for(tr, p), p)
    assert st_.U[0] > p.A0 and st_.U[1] < 0


@given(areas, flows, st.floats(-3e4, 8e4), st.sampled_from(SIDES))
def test_pressure_linear_solution_matches_bisection(A1, Q1, p_b, side):
    p = vessel()
    tr = trace_of([A1, Q1], p)
    lam = lam_for(tr, p)
    st_ = boundary_from_pressure(p_b, tr, side, lam, p)
    A_b = st_.U[0]
    f = lambda Q: nonreflecting_residual((A_b, Q), tr, side, lam, p)  # noqa: E731
    lo, hi = -1e5, 1e5
    assert f(lo) * f(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert st_.U[1] == pytest.approx(0.5 * (lo + hi), rel=1e-12, abs=1e-9)
    assert lax_residual(st_, tr, side, lam) <= 1e-10


@given(areas, flows, st.floats(-2e4, 5e4), st.sampled_from(SIDES))
def test_pressure_alpha_quadratic_residual(A1, Q1, p_b, side):
    p = vessel(1.1)
    tr = trace_of([A1, Q1], p)
    lam = lam_for(tr, p)
    st_ = boundary_from_pressure(p_b, tr, side, lam, p)
    r = nonreflecting_residual(st_.U, tr, side, lam, p)
    assert abs(r) <= 1e-10 * (abs(Q1) + abs(st_.U[1]) + 1e3)
    assert pressure(st_.U[0], p) == pytest.approx(p_b, abs=1e-8 * (abs(p_b) + 1e3))


def test_unattainable_pressure():
    p = vessel()
    tr = trace_of([p.A0, 0.0], p)
    with pytest.raises(BoundaryError):
        boundary_from_pressure(-10 * p.beta * math.sqrt(p.A0), tr, LEFT, 900.0, p)


# -- prescribed velocity and flow ---------------------------------------------

@pytest.mark.parametrize("side", SIDES)
def test_velocity_matching_interior(side):
    p = vessel()
    tr = trace_of([7.0, 21.0], p)
    st_ = boundary_from_velocity(3.0, tr, side, lam_for(tr, p), p)
    np.testing.assert_allclose(st_.U, tr.U, rtol=1e-12)


@pytest.mark.parametrize("side", SIDES)
def test_zero_velocity_on_rest_state(side):
    p = vessel()
    tr = trace_of([p.A0, 0.0], p)
    st_ = boundary_from_velocity(0.0, tr, side, lam_for(tr, p), p)
    assert st_.U[0] == pytest.approx(p.A0, rel=1e-12)
    assert st_.U[1] == 0.0


@given(areas, flows, st.floats(-20.0, 20.0), st.sampled_from(SIDES))
def test_velocity_residual(A1, Q1, u_b, side):
    p = vessel()
    tr = trace_of([A1, Q1], p)
    lam = lam_for(tr, p)
    st_ = boundary_from_velocity(u_b, tr, side, lam, p)
    assert st_.U[1] == pytest.approx(u_b * st_.U[0], rel=1e-14, abs=1e-14)
    assert abs(nonreflecting_residual(st_.U, tr, side, lam, p)) <= 1e-10 * (abs(Q1) + 1e2)
    assert lax_residual(st_, tr, side, lam) <= 1e-10


def test_velocity_form_boundary():
    p = vessel()
    U = np.array([7.0, 4.0])
    tr = trace_of(U, p, form=Form.VELOCITY)
    lam = 1.5 * lambda_bound([(U, Form.VELOCITY)], p)
    st_ = boundary_from_velocity(1.0, tr, LEFT, lam, p, form=Form.VELOCITY)
    assert st_.U[1] == 1.0
    r = nonreflecting_residual(st_.U, tr, LEFT, lam, p, form=Form.VELOCITY)
    assert abs(r) <= 1e-10


@given(areas, flows, st.floats(-100.0, 100.0), st.sampled_from(SIDES))
def test_flow_residual(A1, Q1, Q_b, side):
    p = vessel()
    tr = trace_of([A1, Q1], p)
    lam = lam_for(tr, p)
    st_ = boundary_from_flow(Q_b, tr, side, lam, p)
    assert st_.U[1] == Q_b
    assert abs(nonreflecting_residual(st_.U, tr, side, lam, p)) <= 1e-10 * (abs(Q1) + 1e2)


# -- second order ----------------------------------------------------------------

@pytest.mark.parametrize("side", SIDES)
def test_order2_flat_state_reduces_to_trace(side):
    p = vessel()
    tr = trace_of([7.0, 15.0], p)
    st_ = nonreflecting_order2(tr, side, lam_for(tr, p), p)
    np.testing.assert_allclose(st_.U, tr.U, rtol=1e-12)


@given(areas, flows, areas, flows, st.floats(-1e4, 4e4), st.sampled_from(SIDES))
def test_order2_residual(A1, Q1, A2, Q2, p_b, side):
    p = vessel()
    tr = trace_of([A1, Q1], p, U2=[A2, Q2])
    lam = lam_for(tr, p)
    try:
        st_ = nonreflecting_order2(tr, side, lam, p, ("pressure", p_b))
    except BoundaryError:
        return
    r = nonreflecting_residual(st_.U, tr, side, lam, p, order=2)
    assert abs(r) <= 1e-10 * (3 * lam * (abs(Q1) + abs(st_.U[1])) + 1e4)
    assert lax_residual(st_, tr, side, lam) <= 1e-10


def test_order2_keeps_trace_area_without_datum():
    p = vessel()
    tr = trace_of([7.0, 15.0], p, U2=[7.3, 10.0])
    st_ = nonreflecting_order2(tr, RIGHT, lam_for(tr, p), p)
    assert st_.U[0] == 7.0


def test_order2_needs_second_cell():
    p = vessel()
    tr = EdgeTrace(np.array([7.0, 0.0]), flux(np.array([7.0, 0.0]), p))
    with pytest.raises(ValueError):
        nonreflecting_order2(tr, LEFT, 900.0, p)


# -- walls, valves and dispatch ------------------------------------------------

@pytest.mark.parametrize("side", SIDES)
def test_wall_has_no_mass_flux(side):
    p = vessel()
    tr = trace_of([7.0, 40.0], p)
    lam = lam_for(tr, p)
    st_ = wall_states(tr, side, lam)
    assert st_.U[1] == 0.0
    assert st_.V[0] == pytest.approx(0.0, abs=1e-12)
    if side == LEFT:
        F = lf_interface_flux(st_.U, tr.U, st_.V, tr.V, lam)
    else:
        F = lf_interface_flux(tr.U, st_.U, tr.V, st_.V, lam)
    assert F[0] == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("side", SIDES)
def test_neumann_flux_equals_physical_flux(side):
    p = vessel()
    tr = trace_of([7.7, -25.0], p)
    st_ = boundary_states(Neumann(), 0.0, tr, side, 900.0, p)
    pair = (st_, tr) if side == LEFT else (tr, st_)
    F = lf_interface_flux(pair[0].U, pair[1].U, pair[0].V, pair[1].V, 900.0)
    np.testing.assert_array_equal(F, flux(tr.U, p))


def test_heart_valve_open_delegates_to_pressure():
    p = vessel()
    tr = trace_of([p.A0, 0.0], p)
    lam = lam_for(tr, p)
    valve = HeartValve(Sine(6e4, 5 * math.pi))
    a = heart_valve(0.05, tr, valve, LEFT, lam, p)
    b = boundary_from_pressure(valve.pressure(0.05), tr, LEFT, lam, p)
    np.testing.assert_array_equal(a.U, b.U)
    closed = heart_valve(0.3, tr, valve, LEFT, lam, p)
    assert closed.U[1] == 0.0


def test_heart_valve_schedule():
    valve = HeartValve(Constant(1.0), period=1.0, open_duration=0.3)
    assert valve.is_open(0.1) and not valve.is_open(0.5) and valve.is_open(1.2)
    assert not HeartValve(Sine(1.0, math.pi)).is_open(1.5)


def test_dispatch_types():
    p = vessel()
    tr = trace_of([7.0, 10.0], p, U2=[7.1, 9.0])
    lam = lam_for(tr, p)
    specs = [NonReflecting(), NonReflectingOrder2(), PrescribedPressure(Constant(1e4)),
             PrescribedVelocity(Constant(1.0)), PrescribedFlow(Constant(5.0)),
             Reflecting(), Reflecting(conservative=False),
             HeartValve(Constant(2e4)), PrescribedPressure(Constant(1e4), order=2)]
    for spec in specs:
        for side in SIDES:
            st_ = boundary_states(spec, 0.0, tr, side, lam, p)
            assert st_.U[0] > 0
            assert lax_residual(st_, tr, side, lam) <= 1e-10
    with pytest.raises(TypeError):
        boundary_states(object(), 0.0, tr, LEFT, lam, p)


def test_edge_trace_picks_end_cells():
    p = vessel()
    e = equilibrium_state(np.array([6.0, 7.0, 8.0]), np.array([1.0, 2.0, 3.0]), p)
    left, right = edge_trace(e, LEFT), edge_trace(e, RIGHT)
    np.testing.assert_array_equal(left.U, [6.0, 1.0])
    np.testing.assert_array_equal(left.U2, [7.0, 2.0])
    np.testing.assert_array_equal(right.U, [8.0, 3.0])
    np.testing.assert_array_equal(right.U2, [7.0, 2.0])


@pytest.mark.parametrize("spec", [Neumann(), NonReflecting(), NonReflectingOrder2(),
                                  Reflecting(), Reflecting(conservative=False)])
@pytest.mark.parametrize("order", [1, 2])
def test_rest_state_preserved_by_a_step(spec, order):
    p = vessel()
    e = equilibrium_state(np.full(16, p.A0), 0.0, p)
    lam = lambda_bound([e.U], p)
    ghosts = []
    for side in SIDES:
        st_ = boundary_states(spec, 0.0, edge_trace(e, side), side, lam, p)
        ghosts.append((st_.U, st_.V))
    new = step_limit(e, p, 0.5 / lam, lam, ghosts[0], ghosts[1], 1.0, order)
    np.testing.assert_allclose(new.U[0], p.A0, rtol=1e-15)
    np.testing.assert_allclose(new.U[1], 0.0, atol=1e-12)
