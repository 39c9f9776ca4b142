"""Lax-Friedrichs scheme obtained as the relaxation limit, its MUSCL
extension, and the unsplit finite-epsilon relaxation scheme.

Arrays of states have shape ``(2, n)``. Boundary (ghost) data enters every
routine as a pair ``(U_b, V_b)`` of shape-(2,) arrays for each side.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from . import _kernels
from .model import EdgeState, Form, VesselParams
from .physics import flux, source

Ghost = Tuple[np.ndarray, np.ndarray]


class PositivityError(RuntimeError):
    """An update produced a nonpositive section area."""

    def __init__(self, cell: int, t: float, value: float):
        super().__init__(f"nonpositive area {value:.6g} in cell {cell} at t={t:.9g}")
        self.cell = cell
        self.t = t


def minmod(a, b):
    """Componentwise minmod of two scalars or arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.where(a * b > 0, np.where(np.abs(a) <= np.abs(b), a, b), 0.0)
    return float(out) if out.ndim == 0 else out


def lf_interface_flux(U_left, U_right, V_left, V_right, lam: float) -> np.ndarray:
    """Numerical flux 1/2 (V_l + V_r) - lam/2 (U_r - U_l)."""
    U_left, U_right = np.asarray(U_left, float), np.asarray(U_right, float)
    V_left, V_right = np.asarray(V_left, float), np.asarray(V_right, float)
    return 0.5 * (V_left + V_right) - 0.5 * lam * (U_right - U_left)


def compute_dt(lam: float, dx: float, cfl: float) -> float:
    if not (lam > 0 and dx > 0 and 0 < cfl <= 1):
        raise ValueError(f"invalid time step data lam={lam}, dx={dx}, cfl={cfl}")
    return cfl * dx / lam


def _with_ghosts(U, V, left: Ghost, right: Ghost):
    Ug = np.empty((2, U.shape[1] + 2))
    Vg = np.empty_like(Ug)
    Ug[:, 1:-1], Vg[:, 1:-1] = U, V
    Ug[:, 0], Vg[:, 0] = left
    Ug[:, -1], Vg[:, -1] = right
    return Ug, Vg


def muscl_slopes(Ug, Vg, lam: float, dx: float):
    """Limited slopes of V + lam U and V - lam U for the interior cells.

    ``Ug``/``Vg`` include one ghost cell per side; the results have shape
    ``(2, n)``.
    """
    dU = np.diff(Ug, axis=1)
    dV = np.diff(Vg, axis=1)
    dp = (dV + lam * dU) / (2 * dx)
    dm = (dV - lam * dU) / (2 * dx)
    return minmod(dp[:, :-1], dp[:, 1:]), minmod(dm[:, :-1], dm[:, 1:])


def muscl_correction(U, V, lam: float, dx: float, left: Ghost = None,
                     right: Ghost = None) -> np.ndarray:
    """Second-order corrections for the ``n - 1`` interior interfaces.

    The right-moving characteristic variable V + lam U is reconstructed from
    the upwind (left) cell and V - lam U from the right cell. Without ghost
    data the end cells are given a zero slope.
    """
    U = np.asarray(U, float)
    V = np.asarray(V, float)
    if left is None:
        left = (U[:, 0], V[:, 0])
    if right is None:
        right = (U[:, -1], V[:, -1])
    Ug, Vg = _with_ghosts(U, V, left, right)
    s_plus, s_minus = muscl_slopes(Ug, Vg, lam, dx)
    return 0.5 * dx * (s_plus[:, :-1] - s_minus[:, 1:])


def interface_fluxes(U, V, lam: float, dx: float, left: Ghost, right: Ghost,
                     order: int = 1) -> np.ndarray:
    """All ``n + 1`` interface fluxes of an edge, shape ``(2, n + 1)``.

    The end interfaces always use the first-order flux with the ghost states.
    """
    Ug, Vg = _with_ghosts(U, V, left, right)
    F = 0.5 * (Vg[:, :-1] + Vg[:, 1:]) - 0.5 * lam * (Ug[:, 1:] - Ug[:, :-1])
    if order == 2:
        s_plus, s_minus = muscl_slopes(Ug, Vg, lam, dx)
        F[:, 1:-1] += 0.5 * dx * (s_plus[:, :-1] - s_minus[:, 1:])
    return F


def _check_positive(A, t):
    if not np.all(A > 0):
        j = int(np.argmax(~(A > 0)))
        raise PositivityError(j, t, float(A[j]))


def step_limit(edge: EdgeState, params: VesselParams, dt: float, lam: float,
               left: Ghost, right: Ghost, dx: float, order: int = 1,
               compiled: bool = True) -> EdgeState:
    """One step of the limit scheme; returns a new state with V = F(U).

    Flow-form edges go through the compiled loops unless ``compiled`` is
    false, in which case the vectorised reference path is used.
    """
    U, V = edge.U, edge.V
    fast = compiled and edge.form is Form.FLOW
    if fast:
        U_new = np.empty_like(U)
        _kernels.limit_update(U, V, np.asarray(left[0], float), np.asarray(left[1], float),
                              np.asarray(right[0], float), np.asarray(right[1], float),
                              float(lam), float(dt), float(dx), int(order), U_new)
    else:
        F = interface_fluxes(U, V, lam, dx, left, right, order)
        U_new = U - (dt / dx) * (F[:, 1:] - F[:, :-1])
    if params.mu > 0:
        U_new += dt * source(U, params, edge.form)
    _check_positive(U_new[0], edge.t + dt)
    if fast:
        V_new = np.empty_like(U_new)
        _kernels.flow_flux(U_new[0], U_new[1], params.beta, params.A0, params.rho,
                           params.alpha, V_new)
    else:
        V_new = flux(U_new, params, edge.form)
    return EdgeState(U_new, V_new, edge.t + dt, edge.form)


def step_relaxation(edge: EdgeState, params: VesselParams, dt: float, lam: float,
                    epsilon: float, left: Ghost, right: Ghost,
                    dx: float) -> EdgeState:
    """One step of the unsplit implicit-explicit relaxation scheme.

    The stiff relaxation source is linear in V, so the implicit part is
    solved in closed form once U at the new level is known.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive; use step_limit for the limit")
    U, V = edge.U, edge.V
    Ug, Vg = _with_ghosts(U, V, left, right)
    c = dt / (2 * dx)
    U_new = (U - c * (Vg[:, 2:] - Vg[:, :-2])
             + lam * c * (Ug[:, 2:] - 2 * U + Ug[:, :-2]))
    if params.mu > 0:
        U_new += dt * source(U, params, edge.form)
    _check_positive(U_new[0], edge.t + dt)
    V_star = (V - lam * lam * c * (Ug[:, 2:] - Ug[:, :-2])
              + lam * c * (Vg[:, 2:] - 2 * V + Vg[:, :-2]))
    k = dt / epsilon
    V_new = (V_star + k * flux(U_new, params, edge.form)) / (1.0 + k)
    return EdgeState(U_new, V_new, edge.t + dt, edge.form)


def periodic_ghosts(edge: EdgeState) -> Tuple[Ghost, Ghost]:
    """Ghost data closing an edge on itself."""
    U, V = edge.U, edge.V
    return (U[:, -1].copy(), V[:, -1].copy()), (U[:, 0].copy(), V[:, 0].copy())
