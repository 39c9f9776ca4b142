"""Semi-implicit treatment of the viscoelastic wall term."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import EdgeState, Form, VesselParams
from .physics import flux


class SingularPivotError(ZeroDivisionError):
    def __init__(self, index: int):
        super().__init__(f"zero pivot in row {index} of tridiagonal system")
        self.index = index


@dataclass
class Tridiagonal:
    """Tridiagonal system; ``sub[i]`` couples row i+1 to column i."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != n - 1 or len(self.sup) != n - 1 or len(self.rhs) != n:
            raise ValueError("inconsistent tridiagonal dimensions")

    def matvec(self, x):
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y


def thomas_solve(T: Tridiagonal) -> np.ndarray:
    """Gaussian elimination without pivoting for a tridiagonal system."""
    a = np.asarray(T.sub, float)
    b = np.asarray(T.diag, float)
    c = np.asarray(T.sup, float)
    d = np.asarray(T.rhs, float)
    n = len(b)
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)
    if b[0] == 0:
        raise SingularPivotError(0)
    if n > 1:
        cp[0] = c[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, n):
        m = b[i] - a[i - 1] * cp[i - 1]
        if m == 0:
            raise SingularPivotError(i)
        if i < n - 1:
            cp[i] = c[i] / m
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / m
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def diffusion_coefficient(A, params: VesselParams):
    """gamma sqrt(pi) A / (2 rho A0^{3/2})."""
    return params.gamma * math.sqrt(math.pi) * np.asarray(A) / (
        2.0 * params.rho * params.A0 ** 1.5)


def viscoelastic_system(Q_hat, A_old, dt: float, dx: float, params: VesselParams,
                        left_value: Optional[float] = None,
                        right_value: Optional[float] = None) -> Tridiagonal:
    """Assemble (I - dt D L) Q = Q_hat.

    End rows use a mirror (zero-gradient) ghost unless a ghost value for Q is
    given, in which case it is moved to the right-hand side.
    """
    Q_hat = np.asarray(Q_hat, float)
    n = Q_hat.size
    k = dt * diffusion_coefficient(A_old, params) / (dx * dx)
    diag = 1.0 + 2.0 * k
    sub = -k[1:].copy()
    sup = -k[:-1].copy()
    rhs = Q_hat.copy()
    if left_value is None:
        diag[0] -= k[0]
    else:
        rhs[0] += k[0] * left_value
    if right_value is None:
        diag[-1] -= k[-1]
    else:
        rhs[-1] += k[-1] * right_value
    return Tridiagonal(sub, diag, sup, rhs)


def viscoelastic_step(edge: EdgeState, A_old, dt: float, dx: float,
                      params: VesselParams, left_value: Optional[float] = None,
                      right_value: Optional[float] = None) -> EdgeState:
    """Implicit parabolic correction of Q after a hyperbolic update.

    ``A_old`` is the area at the start of the step (the coefficient is frozen
    there). A is left untouched and V is reset to F(U).
    """
    if params.gamma == 0:
        return edge
    if edge.form is not Form.FLOW:
        raise ValueError("the viscoelastic term is defined for the flow form")
    T = viscoelastic_system(edge.U[1], A_old, dt, dx, params, left_value, right_value)
    U = edge.U.copy()
    U[1] = thomas_solve(T)
    return EdgeState(U, flux(U, params, edge.form), edge.t, edge.form)
