"""Closed-form physical laws of the reduced blood-flow model.

Functions accept scalars or numpy arrays for the state components and
a :class:`~lfblood.model.VesselParams` instance.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Form, VesselParams


def _check_area(A):
    if isinstance(A, float):
        if not A > 0:
            raise ValueError(f"section area must be positive, got {A}")
        return float(A)
    A = np.asarray(A, dtype=float)
    if np.any(~(A > 0)):
        raise ValueError(f"section area must be positive, got min {np.min(A)}")
    return A


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def pressure(A, params: VesselParams):
    """p = Pext + beta (sqrt(A) - sqrt(A0))."""
    A = _check_area(A)
    if isinstance(A, float):
        return params.Pext + params.beta * (math.sqrt(A) - math.sqrt(params.A0))
    return _out(params.Pext + params.beta * (np.sqrt(A) - math.sqrt(params.A0)))


def dpressure(A, params: VesselParams):
    """dp/dA = beta / (2 sqrt(A))."""
    A = _check_area(A)
    return _out(0.5 * params.beta / np.sqrt(A))


def pressure_inverse(p, params: VesselParams):
    """Section area at which the pressure law yields ``p``."""
    if params.beta == 0:
        raise ValueError("pressure law is not invertible for beta = 0")
    root = (np.asarray(p, dtype=float) - params.Pext) / params.beta + math.sqrt(params.A0)
    if np.any(~(root > 0)):
        raise ValueError(f"pressure {p} lies below the collapse pressure "
                         f"{params.Pext - params.beta * math.sqrt(params.A0)}")
    return _out(root * root)


def pressure_antiderivative(A, params: VesselParams):
    """P(A) = A0 Pext + integral of p from A0 to A."""
    A = _check_area(A)
    A0, sA0 = params.A0, math.sqrt(params.A0)
    sA = math.sqrt(A) if isinstance(A, float) else np.sqrt(A)
    val = (A0 * params.Pext + params.Pext * (A - A0)
           + params.beta * (2.0 / 3.0 * (A * sA - A0 * sA0) - sA0 * (A - A0)))
    return float(val) if isinstance(val, float) else _out(val)


def total_pressure(A, Q, params: VesselParams):
    """alpha rho/2 (Q/A)^2 + p(A)."""
    u = np.asarray(Q) / _check_area(A)
    return _out(0.5 * params.alpha * params.rho * u * u + pressure(A, params))


def flux_flow(U, params: VesselParams) -> np.ndarray:
    """Flux of the flow form for U = (A, Q); works on shape (2,) or (2, n)."""
    U = np.asarray(U, dtype=float)
    A, Q = U[0], U[1]
    A = _check_area(A)
    # A p - P = beta/3 (A^{3/2} - A0^{3/2}) for the square-root law; Pext cancels
    ApP = params.beta / 3.0 * (A * np.sqrt(A) - params.A0 * math.sqrt(params.A0))
    return np.array([Q, params.alpha * Q * Q / A + ApP / params.rho])


def flux_velocity(U, params: VesselParams) -> np.ndarray:
    """Flux of the velocity form for U = (A, u); alpha must be 1."""
    if params.alpha != 1.0:
        raise ValueError("the velocity form is conservative only for alpha = 1")
    U = np.asarray(U, dtype=float)
    A, u = U[0], U[1]
    p = pressure(A, params)
    return np.array([A * u, 0.5 * u * u + np.asarray(p) / params.rho])


def flux(U, params: VesselParams, form: Form = Form.FLOW) -> np.ndarray:
    if form is Form.FLOW:
        return flux_flow(U, params)
    return flux_velocity(U, params)


def viscous_source(A, Q, params: VesselParams):
    """Wall-friction source for the Hagen-Poiseuille profile.

    S_v = -2 pi mu (psi + 2) Q / A. The flat profile (alpha = 1) has no
    finite wall shear, so a viscous flat-profile vessel is rejected.
    """
    A = _check_area(A)
    if params.mu == 0:
        return _out(np.zeros_like(A * np.asarray(Q, dtype=float)))
    psi = params.psi
    if psi is None:
        raise ValueError("mu > 0 requires alpha > 1 (finite profile exponent)")
    return _out(-2.0 * math.pi * params.mu * (psi + 2.0) * np.asarray(Q) / A)


def source(U, params: VesselParams, form: Form = Form.FLOW) -> np.ndarray:
    """Source vector S(U); zero in the first component."""
    U = np.asarray(U, dtype=float)
    out = np.zeros_like(U)
    if params.mu == 0:
        return out
    if form is Form.FLOW:
        out[1] = viscous_source(U[0], U[1], params)
    else:
        out[1] = viscous_source(U[0], U[0] * U[1], params) / U[0]
    return out


def sound_speed_sq(A, params: VesselParams, literal: bool = False):
    """beta sqrt(A) / (2 rho); ``literal`` divides additionally by A0."""
    A = _check_area(A)
    c2 = params.beta * np.sqrt(A) / (2.0 * params.rho)
    if literal:
        c2 = c2 / params.A0
    return _out(c2)


def char_speeds(A, Q, params: VesselParams, literal: bool = False):
    """Eigenvalues (lambda_-, lambda_+) of the flow-form flux Jacobian."""
    A = _check_area(A)
    Q = np.asarray(Q, dtype=float)
    a = params.alpha
    u = Q / A
    root = np.sqrt(a * (a - 1.0) * u * u + sound_speed_sq(A, params, literal))
    return _out(a * u - root), _out(a * u + root)


def char_speeds_state(U, params: VesselParams, form: Form = Form.FLOW):
    U = np.asarray(U, dtype=float)
    if form is Form.FLOW:
        return char_speeds(U[0], U[1], params)
    return char_speeds(U[0], U[0] * U[1], params)


def lambda_bound(states, params) -> float:
    """Smallest relaxation speed satisfying the subcharacteristic condition.

    ``states`` is a sequence of U arrays (shape (2,) or (2, n)) and ``params``
    either one VesselParams or a matching sequence. Velocity-form states must
    be passed as (state, Form.VELOCITY) pairs.
    """
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    if isinstance(params, VesselParams):
        params = [params] * len(states)
    lam = 0.0
    for U, prm in zip(states, params):
        form = Form.FLOW
        if isinstance(U, tuple):
            U, form = U
        lo, hi = char_speeds_state(U, prm, form)
        lam = max(lam, float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
    if not lam > 0:
        raise ValueError("relaxation speed must be positive")
    return lam
