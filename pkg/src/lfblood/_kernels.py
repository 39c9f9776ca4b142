"""Compiled loops for the flow-form limit scheme.

They reproduce :func:`lfblood.scheme.interface_fluxes` and the flow-form
flux for the square-root pressure law without temporaries; the numpy
versions remain the reference and the tests compare both.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if abs(a) <= abs(b):
        return a
    return b


@njit(cache=True)
def flow_flux(A, Q, beta, A0, rho, alpha, V):
    c = beta / (3.0 * rho)
    ref = A0 * math.sqrt(A0)
    for j in range(A.size):
        a = A[j]
        V[0, j] = Q[j]
        V[1, j] = alpha * Q[j] * Q[j] / a + c * (a * math.sqrt(a) - ref)


@njit(cache=True)
def max_speed(A, Q, beta, rho, alpha):
    lam = 0.0
    k = beta / (2.0 * rho)
    for j in range(A.size):
        u = Q[j] / A[j]
        r = math.sqrt(alpha * (alpha - 1.0) * u * u + k * math.sqrt(A[j]))
        s = abs(alpha * u) + r
        if s > lam:
            lam = s
    return lam


@njit(cache=True)
def limit_update(U, V, UL, VL, UR, VR, lam, dt, dx, order, U_new):
    """U_new = U - dt/dx (F_{j+1/2} - F_{j-1/2}) with first- or second-order fluxes."""
    n = U.shape[1]
    r = dt / dx
    for k in range(2):
        # ghost-extended access
        def_u0 = UL[k]
        def_v0 = VL[k]
        F_prev = 0.0
        # slopes of the previous cell (index j-1) for the correction
        sp_prev = 0.0
        for j in range(n + 1):
            if j == 0:
                ul, vl = def_u0, def_v0
            else:
                ul, vl = U[k, j - 1], V[k, j - 1]
            if j == n:
                ur, vr = UR[k], VR[k]
            else:
                ur, vr = U[k, j], V[k, j]
            F = 0.5 * (vl + vr) - 0.5 * lam * (ur - ul)
            if order == 2 and j < n:
                # slopes of cell j from its two one-sided differences
                if j == 0:
                    um, vm = def_u0, def_v0
                else:
                    um, vm = U[k, j - 1], V[k, j - 1]
                if j == n - 1:
                    up, vp = UR[k], VR[k]
                else:
                    up, vp = U[k, j + 1], V[k, j + 1]
                c0 = U[k, j]
                w0 = V[k, j]
                sp = _minmod((w0 - vm + lam * (c0 - um)) / (2 * dx),
                             (vp - w0 + lam * (up - c0)) / (2 * dx))
                sm = _minmod((w0 - vm - lam * (c0 - um)) / (2 * dx),
                             (vp - w0 - lam * (up - c0)) / (2 * dx))
                if 0 < j:
                    F += 0.5 * dx * (sp_prev - sm)
                sp_prev = sp
            if j > 0:
                U_new[k, j - 1] = U[k, j - 1] - r * (F - F_prev)
            F_prev = F
    return U_new


def warmup():
    U = np.ones((2, 3))
    V = np.ones((2, 3))
    g = np.ones(2)
    limit_update(U, V, g, g, g, g, 1.0, 0.1, 1.0, 2, np.empty((2, 3)))
    flow_flux(U[0], U[1], 1.0, 1.0, 1.0, 1.0, V)
    max_speed(U[0], U[1], 1.0, 1.0, 1.0)
