"""Coupling states at vascular junctions.

Every junction solver receives the traces (cell data next to the node) of
the incident edges and returns ghost states for each edge endpoint. The
auxiliary states are tied to the ghost states by the Lax-curve relations:
the incoming edge ends on the right, the outgoing edges start on the left.

Physical conditions are continuity of mass flux and of total pressure
``alpha rho/2 (Q/A)^2 + p``; the auxiliary conditions are their consistent
counterparts for V. Residuals are made dimensionless with ``lam * A_mean``
(mass flux), ``rho * lam^2`` (pressure) and ``lam^2 * A_mean`` (V^Q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ._roots import ConvergenceError, bracketed_roots, damped_newton, quadratic_roots
from .boundary import BoundaryStates, EdgeTrace, LEFT, RIGHT, lax_curve_V
from .model import VesselParams
from .physics import dpressure, pressure, pressure_antiderivative

RESIDUAL_TOL = 1e-9


class CouplingError(RuntimeError):
    """No admissible coupling state was found."""

    def __init__(self, message: str, history=()):
        super().__init__(message)
        self.history = list(history)


@dataclass
class Endpoint:
    """Trace data and parameters of one edge end at a junction."""

    trace: EdgeTrace
    params: VesselParams


def _pt(A, Q, prm: VesselParams):
    u = Q / A
    return 0.5 * prm.alpha * prm.rho * u * u + pressure(A, prm)


def _W(VQ, A, Q, prm: VesselParams):
    """V^Q - alpha/2 Q^2/A + P(A)/rho, which equals A p_t / rho at equilibrium."""
    return VQ - 0.5 * prm.alpha * Q * Q / A + pressure_antiderivative(A, prm) / prm.rho


def _scales(lam, areas, rhos):
    Abar = float(np.mean(areas))
    return lam * Abar, float(np.mean(rhos)) * lam * lam, lam * lam * Abar


# -- one-to-one, flow form ----------------------------------------------------

def one_to_one_residual(x, inc: Endpoint, out: Endpoint, lam: float) -> np.ndarray:
    """Scaled residuals of the four coupling equations at x = (A_R, Q_R, A_L, Q_L).

    Equations: mass flux continuity, total pressure continuity, V^A
    continuity and the V^Q condition, with V eliminated via Lax curves.
    """
    A_R, Q_R, A_L, Q_L = x
    tN, t1 = inc.trace, out.trace
    V_R = lax_curve_V((A_R, Q_R), tN, RIGHT, lam)
    V_L = lax_curve_V((A_L, Q_L), t1, LEFT, lam)
    sq, sp, sv = _scales(lam, (tN.U[0], t1.U[0]), (inc.params.rho, out.params.rho))
    return np.array([
        (Q_R - Q_L) / sq,
        (_pt(A_R, Q_R, inc.params) - _pt(A_L, Q_L, out.params)) / sp,
        (V_R[0] - V_L[0]) / sq,
        (_W(V_R[1], A_R, Q_R, inc.params)
         - A_R / A_L * _W(V_L[1], A_L, Q_L, out.params)) / sv,
    ])


def _states_pair(x, inc: Endpoint, out: Endpoint, lam: float):
    U_R = np.array(x[:2], float)
    U_L = np.array(x[2:], float)
    return (BoundaryStates(U_R, lax_curve_V(U_R, inc.trace, RIGHT, lam)),
            BoundaryStates(U_L, lax_curve_V(U_L, out.trace, LEFT, lam)))


def _positive_areas(idx):
    return lambda x: bool(np.all(x[list(idx)] > 0))


def couple_one_to_one_newton(inc: Endpoint, out: Endpoint, lam: float,
                             x0=None) -> Tuple[BoundaryStates, BoundaryStates]:
    """Damped Newton on the raw four-unknown system (initial guess: traces)."""
    if x0 is None:
        x0 = np.concatenate([inc.trace.U, out.trace.U])
    try:
        x = damped_newton(lambda y: one_to_one_residual(y, inc, out, lam), x0,
                          tol=1e-12, maxiter=50, admissible=_positive_areas((0, 2)))
    except ConvergenceError as exc:
        raise CouplingError(f"one-to-one Newton failed: {exc}", exc.history) from exc
    return _states_pair(x, inc, out, lam)


def _reduced_candidates(inc: Endpoint, out: Endpoint, lam: float) -> List[np.ndarray]:
    """Solutions of the system reduced to a scalar equation in A_R.

    Q_L = Q_R; V^A continuity gives A_L as an affine function of A_R; the
    V^Q condition is then quadratic in Q_R, and total pressure continuity
    leaves one scalar equation per quadratic root branch.
    """
    tN, t1 = inc.trace, out.trace
    p1, p2 = inc.params, out.params
    A_N, Q_N = tN.U
    A_1, Q_1 = t1.U
    S = (tN.V[0] - t1.V[0]) / lam + A_N + A_1

    def branch_q(A_R):
        A_L = S - A_R
        r = A_R / A_L
        a = 0.5 * p1.alpha / A_R - 0.5 * p2.alpha * A_R / (A_L * A_L)
        b = lam * (1.0 + r)
        c = (r * (t1.V[1] - lam * Q_1 + pressure_antiderivative(A_L, p2) / p2.rho)
             - pressure_antiderivative(A_R, p1) / p1.rho - tN.V[1] - lam * Q_N)
        # a vanishes where A_L = A_R; the regular root then tends to -c/b
        if abs(a) * abs(c) <= 1e-15 * b * b:
            return A_L, -c / b, None
        regular, other = quadratic_roots(a, b, c)
        return A_L, regular, other

    def g(A_R, k):
        if not 0 < A_R < S:
            return float("nan")
        A_L, q1, q2 = branch_q(A_R)
        q = q1 if k == 0 else q2
        if q is None or not math.isfinite(q):
            return float("nan")
        return (_pt(A_R, q, p1) - _pt(A_L, q, p2)) / (p1.rho * lam * lam)

    def g_many(A_R, k):
        A_R = np.asarray(A_R, float)
        A_L = S - A_R
        ok = (A_R > 0) & (A_L > 0)
        A_R, A_L = np.where(ok, A_R, 1.0), np.where(ok, A_L, 1.0)
        r = A_R / A_L
        a = 0.5 * p1.alpha / A_R - 0.5 * p2.alpha * A_R / (A_L * A_L)
        b = lam * (1.0 + r)
        c = (r * (t1.V[1] - lam * Q_1 + pressure_antiderivative(A_L, p2) / p2.rho)
             - pressure_antiderivative(A_R, p1) / p1.rho - tN.V[1] - lam * Q_N)
        disc = b * b - 4.0 * a * c
        with np.errstate(invalid="ignore", divide="ignore"):
            t = -0.5 * (b + np.copysign(np.sqrt(disc), b))
            q = c / t if k == 0 else t / a
        small = np.abs(a) * np.abs(c) <= 1e-15 * b * b
        if k == 0:
            q = np.where(small, -c / b, q)
        else:
            q = np.where(small, np.nan, q)
        q = np.where(ok & (disc >= 0), q, np.nan)
        return (_pt(A_R, q, p1) - _pt(A_L, q, p2)) / (p1.rho * lam * lam)

    lo = 0.25 * min(A_N, A_1)
    hi = min(4.0 * max(A_N, A_1), S * (1.0 - 1e-12))
    candidates = []
    if not lo < hi:
        return candidates
    for k in (0, 1):
        try:
            roots = bracketed_roots(lambda A: g(A, k), lo, hi, samples=48,
                                    f_many=lambda A: g_many(A, k), splits=(0.5 * S,))
        except ConvergenceError:
            continue
        for A_R in roots:
            A_L, q1, q2 = branch_q(A_R)
            q = q1 if k == 0 else q2
            if q is None or not math.isfinite(q) or not A_L > 0:
                continue
            candidates.append(np.array([A_R, q, A_L, q]))
    return candidates


def couple_one_to_one(inc: Endpoint, out: Endpoint, lam: float
                      ) -> Tuple[BoundaryStates, BoundaryStates]:
    """Coupling states for a one-to-one junction in the flow form.

    For alpha = 1 on both sides the closed-form reduction is used and the
    admissible solution closest (L1) to the traces is returned; otherwise the
    raw system is solved by damped Newton.
    """
    if inc.params.alpha != 1.0 or out.params.alpha != 1.0:
        return couple_one_to_one_newton(inc, out, lam)
    if not (inc.trace.U[0] > 0 and out.trace.U[0] > 0):
        raise CouplingError("nonpositive trace area")
    traces = np.concatenate([inc.trace.U, out.trace.U])
    best, best_dist, best_res = None, math.inf, math.inf
    for x in _reduced_candidates(inc, out, lam):
        res = float(np.max(np.abs(one_to_one_residual(x, inc, out, lam))))
        best_res = min(best_res, res)
        if res > RESIDUAL_TOL:
            continue
        dist = float(np.sum(np.abs(x - traces)))
        if dist < best_dist:
            best, best_dist = x, dist
    if best is None:
        raise CouplingError(f"no admissible one-to-one coupling state "
                            f"(best residual {best_res:.3e})")
    return _states_pair(best, inc, out, lam)


# -- one-to-one, velocity form ------------------------------------------------

def one_to_one_velocity_residual(x, inc: Endpoint, out: Endpoint, lam: float) -> np.ndarray:
    """Scaled residuals at x = (A_R, u_R, A_L, u_L) for the velocity form."""
    A_R, u_R, A_L, u_L = x
    V_R = lax_curve_V((A_R, u_R), inc.trace, RIGHT, lam)
    V_L = lax_curve_V((A_L, u_L), out.trace, LEFT, lam)
    sq, sp, _ = _scales(lam, (inc.trace.U[0], out.trace.U[0]),
                        (inc.params.rho, out.params.rho))
    return np.array([
        (A_R * u_R - A_L * u_L) / sq,
        (0.5 * inc.params.rho * u_R * u_R + pressure(A_R, inc.params)
         - 0.5 * out.params.rho * u_L * u_L - pressure(A_L, out.params)) / sp,
        (V_R[0] - V_L[0]) / sq,
        (V_R[1] - V_L[1]) / (lam * lam),
    ])


def _one_to_one_velocity_jacobian(x, inc: Endpoint, out: Endpoint, lam: float):
    A_R, u_R, A_L, u_L = x
    sq, sp, _ = _scales(lam, (inc.trace.U[0], out.trace.U[0]),
                        (inc.params.rho, out.params.rho))
    return np.array([
        [u_R / sq, A_R / sq, -u_L / sq, -A_L / sq],
        [dpressure(A_R, inc.params) / sp, inc.params.rho * u_R / sp,
         -dpressure(A_L, out.params) / sp, -out.params.rho * u_L / sp],
        [-lam / sq, 0.0, -lam / sq, 0.0],
        [0.0, -1.0 / lam, 0.0, -1.0 / lam],
    ])


def couple_one_to_one_velocity(inc: Endpoint, out: Endpoint, lam: float
                               ) -> Tuple[BoundaryStates, BoundaryStates]:
    """Coupling states for velocity-form edges (alpha = 1)."""
    if inc.params.alpha != 1.0 or out.params.alpha != 1.0:
        raise ValueError("velocity-form coupling requires alpha = 1")
    x0 = np.concatenate([inc.trace.U, out.trace.U])
    try:
        x = damped_newton(lambda y: one_to_one_velocity_residual(y, inc, out, lam), x0,
                          jacobian=lambda y: _one_to_one_velocity_jacobian(y, inc, out, lam),
                          tol=1e-12, maxiter=50, admissible=_positive_areas((0, 2)))
    except ConvergenceError as exc:
        raise CouplingError(f"velocity coupling failed: {exc}", exc.history) from exc
    res = np.max(np.abs(one_to_one_velocity_residual(x, inc, out, lam)))
    if res > RESIDUAL_TOL:
        raise CouplingError(f"velocity coupling residual {res:.3e}")
    return _states_pair(x, inc, out, lam)


# -- one-to-two ---------------------------------------------------------------

def one_to_two_residual(x, parent: Endpoint, d1: Endpoint, d2: Endpoint,
                        lam: float) -> np.ndarray:
    """Scaled residuals at x = (A_R^I, Q_R^I, A_L^II, Q_L^II, A_L^III, Q_L^III)."""
    A1, Q1, A2, Q2, A3, Q3 = x
    V1 = lax_curve_V((A1, Q1), parent.trace, RIGHT, lam)
    V2 = lax_curve_V((A2, Q2), d1.trace, LEFT, lam)
    V3 = lax_curve_V((A3, Q3), d2.trace, LEFT, lam)
    sq, sp, sv = _scales(lam, (parent.trace.U[0], d1.trace.U[0], d2.trace.U[0]),
                         (parent.params.rho, d1.params.rho, d2.params.rho))
    pt1 = _pt(A1, Q1, parent.params)
    W1 = _W(V1[1], A1, Q1, parent.params)
    return np.array([
        (Q1 - Q2 - Q3) / sq,
        (pt1 - _pt(A2, Q2, d1.params)) / sp,
        (pt1 - _pt(A3, Q3, d2.params)) / sp,
        (V1[0] - V2[0] - V3[0]) / sq,
        (A2 / A1 * W1 - _W(V2[1], A2, Q2, d1.params)) / sv,
        (A3 / A1 * W1 - _W(V3[1], A3, Q3, d2.params)) / sv,
    ])


def one_to_two_jacobian(x, parent: Endpoint, d1: Endpoint, d2: Endpoint,
                        lam: float) -> np.ndarray:
    A1, Q1, A2, Q2, A3, Q3 = x
    P, D1, D2 = parent.params, d1.params, d2.params
    sq, sp, sv = _scales(lam, (parent.trace.U[0], d1.trace.U[0], d2.trace.U[0]),
                         (P.rho, D1.rho, D2.rho))

    def dpt(A, Q, prm):
        return (-prm.alpha * prm.rho * Q * Q / A ** 3 + dpressure(A, prm),
                prm.alpha * prm.rho * Q / (A * A))

    def dW(A, Q, prm, sign):
        # V^Q on the ghost side moves with -lam Q (right end) or +lam Q (left end)
        return (0.5 * prm.alpha * Q * Q / (A * A) + pressure(A, prm) / prm.rho,
                sign * lam - prm.alpha * Q / A)

    V1 = lax_curve_V((A1, Q1), parent.trace, RIGHT, lam)
    W1 = _W(V1[1], A1, Q1, parent.params)
    p1A, p1Q = dpt(A1, Q1, P)
    p2A, p2Q = dpt(A2, Q2, D1)
    p3A, p3Q = dpt(A3, Q3, D2)
    w1A, w1Q = dW(A1, Q1, P, -1.0)
    w2A, w2Q = dW(A2, Q2, D1, 1.0)
    w3A, w3Q = dW(A3, Q3, D2, 1.0)
    J = np.zeros((6, 6))
    J[0] = [0, 1 / sq, 0, -1 / sq, 0, -1 / sq]
    J[1] = [p1A / sp, p1Q / sp, -p2A / sp, -p2Q / sp, 0, 0]
    J[2] = [p1A / sp, p1Q / sp, 0, 0, -p3A / sp, -p3Q / sp]
    J[3] = [-lam / sq, 0, -lam / sq, 0, -lam / sq, 0]
    J[4] = [(-A2 / A1 ** 2 * W1 + A2 / A1 * w1A) / sv, A2 / A1 * w1Q / sv,
            (W1 / A1 - w2A) / sv, -w2Q / sv, 0, 0]
    J[5] = [(-A3 / A1 ** 2 * W1 + A3 / A1 * w1A) / sv, A3 / A1 * w1Q / sv,
            0, 0, (W1 / A1 - w3A) / sv, -w3Q / sv]
    return J


def couple_one_to_two(parent: Endpoint, d1: Endpoint, d2: Endpoint, lam: float
                      ) -> Tuple[BoundaryStates, BoundaryStates, BoundaryStates]:
    """Coupling states for a bifurcation (one incoming, two outgoing edges)."""
    x0 = np.concatenate([parent.trace.U, d1.trace.U, d2.trace.U])
    if not np.all(x0[[0, 2, 4]] > 0):
        raise CouplingError("nonpositive trace area")
    try:
        x = damped_newton(lambda y: one_to_two_residual(y, parent, d1, d2, lam), x0,
                          jacobian=lambda y: one_to_two_jacobian(y, parent, d1, d2, lam),
                          tol=1e-12, maxiter=50, admissible=_positive_areas((0, 2, 4)))
    except ConvergenceError as exc:
        raise CouplingError(f"one-to-two Newton failed: {exc}", exc.history) from exc
    res = np.max(np.abs(one_to_two_residual(x, parent, d1, d2, lam)))
    if res > RESIDUAL_TOL:
        raise CouplingError(f"one-to-two residual {res:.3e}")
    U1, U2, U3 = x[:2], x[2:4], x[4:]
    return (BoundaryStates(U1, lax_curve_V(U1, parent.trace, RIGHT, lam)),
            BoundaryStates(U2, lax_curve_V(U2, d1.trace, LEFT, lam)),
            BoundaryStates(U3, lax_curve_V(U3, d2.trace, LEFT, lam)))


# -- diagnostics --------------------------------------------------------------

def coupling_errors(U_N, params_in: VesselParams, U_1, params_out: VesselParams):
    """Mismatch of mass flux and total pressure between the node traces.

    ``U_N`` is the last cell of the incoming edge, ``U_1`` the first cell of
    the outgoing edge (flow form).
    """
    A_N, Q_N = U_N
    A_1, Q_1 = U_1
    e1 = abs(Q_N - Q_1)
    e2 = abs(_pt(A_N, Q_N, params_in) - _pt(A_1, Q_1, params_out))
    return float(e1), float(e2)
