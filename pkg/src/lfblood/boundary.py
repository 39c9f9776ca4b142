"""Boundary data for the relaxation-limit scheme.

A boundary law produces a ghost state ``U_b`` adjacent to the first (left) or
last (right) cell; the matching auxiliary state ``V_b`` always follows from
the Lax-curve relations

    left:   V_b - V_1 = lam (U_b - U_1)
    right:  V_b - V_N = lam (U_N - U_b)

so that the boundary interface flux of the scheme equals ``V_b``.

Prescribed data is complemented by the discrete non-reflecting relation

    left:   Q_1 - Q_b = lam_+(U_b) (A_1 - A_b)
    right:  Q_N - Q_b = lam_-(U_b) (A_N - A_b)

or its three-point (second-order) analogue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._roots import ConvergenceError, safeguarded_newton
from .model import EdgeState, Form, VesselParams
from .physics import pressure_inverse, sound_speed_sq

LEFT = "left"
RIGHT = "right"


class BoundaryError(RuntimeError):
    """No admissible boundary state exists for the imposed datum."""


# -- prescribed time functions ------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class Sine:
    """``offset + amplitude * sin(omega t + phase)``."""

    amplitude: float
    omega: float
    offset: float = 0.0
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.offset + self.amplitude * math.sin(self.omega * t + self.phase)


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation of samples; held constant outside."""

    times: Sequence[float]
    values: Sequence[float]

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) < 1:
            raise ValueError("tabulated function needs matching nonempty samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("tabulated times must increase strictly")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("tabulated values must be finite")

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


TimeFunction = Callable[[float], float]


# -- boundary specifications --------------------------------------------------

@dataclass(frozen=True)
class Neumann:
    """Zero-gradient closure: the ghost state copies the adjacent cell."""

    dirichlet_q = False


@dataclass(frozen=True)
class NonReflecting:
    """Non-reflecting outflow without additional datum (ghost = trace)."""

    dirichlet_q = False


@dataclass(frozen=True)
class NonReflectingOrder2:
    """Second-order non-reflecting closure keeping the trace area."""

    dirichlet_q = False


@dataclass(frozen=True)
class PrescribedPressure:
    pressure: TimeFunction
    order: int = 1
    dirichlet_q = False


@dataclass(frozen=True)
class PrescribedVelocity:
    velocity: TimeFunction
    order: int = 1
    dirichlet_q = True


@dataclass(frozen=True)
class PrescribedFlow:
    flow: TimeFunction
    order: int = 1
    dirichlet_q = True


@dataclass(frozen=True)
class Reflecting:
    """Closed end, u = 0.

    The default wall closure also sets the mass component of V to zero, so
    no mass crosses the boundary interface. With ``conservative=False`` the
    area follows from the non-reflecting relation with u_b = 0 instead.
    """

    order: int = 1
    conservative: bool = True
    dirichlet_q = True


@dataclass(frozen=True)
class HeartValve:
    """Inlet alternating between a prescribed pressure and a closed valve.

    Without a schedule the valve is open while the pressure is positive.
    With ``period`` and ``open_duration`` it is open whenever
    ``t mod period < open_duration``.
    """

    pressure: TimeFunction
    period: Optional[float] = None
    open_duration: Optional[float] = None
    order: int = 1
    dirichlet_q = False

    def is_open(self, t: float) -> bool:
        if self.period is None:
            return self.pressure(t) > 0
        return math.fmod(t, self.period) < self.open_duration


BoundarySpec = Union[Neumann, NonReflecting, NonReflectingOrder2, PrescribedPressure,
                     PrescribedVelocity, PrescribedFlow, Reflecting, HeartValve]


@dataclass
class BoundaryStates:
    U: np.ndarray
    V: np.ndarray


@dataclass
class EdgeTrace:
    """Data of the cell next to a boundary and, for order 2, its neighbour."""

    U: np.ndarray
    V: np.ndarray
    U2: Optional[np.ndarray] = None
    V2: Optional[np.ndarray] = None


def edge_trace(edge: EdgeState, side: str) -> EdgeTrace:
    if side == LEFT:
        return EdgeTrace(edge.U[:, 0].copy(), edge.V[:, 0].copy(),
                         edge.U[:, 1].copy(), edge.V[:, 1].copy())
    return EdgeTrace(edge.U[:, -1].copy(), edge.V[:, -1].copy(),
                     edge.U[:, -2].copy(), edge.V[:, -2].copy())


def lax_curve_V(U_b, trace: EdgeTrace, side: str, lam: float) -> np.ndarray:
    U_b = np.asarray(U_b, float)
    if side == LEFT:
        return trace.V + lam * (U_b - trace.U)
    return trace.V + lam * (trace.U - U_b)


def _states(U_b, trace, side, lam) -> BoundaryStates:
    U_b = np.asarray(U_b, float)
    if not U_b[0] > 0:
        raise BoundaryError(f"nonpositive boundary area {U_b[0]}")
    return BoundaryStates(U_b, lax_curve_V(U_b, trace, side, lam))


def _sigma(side: str) -> float:
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return 1.0 if side == LEFT else -1.0


def _difference_data(trace: EdgeTrace, side: str, lam: float, order: int):
    """Weights (m, e) so that the relation reads m (X_t - X_b) + e = ...

    Order 1 uses the two-point difference (m = 1, e = 0); order 2 the
    three-point one-sided difference, which brings in V of the second cell:
    e = V_1 - V_2 on the left and V_{N-1} - V_N on the right.
    """
    if order == 1:
        return 1.0, np.zeros(2)
    if order != 2:
        raise ValueError(f"boundary order must be 1 or 2, got {order}")
    if trace.U2 is None:
        raise ValueError("second-order boundary needs two interior cells")
    if side == LEFT:
        return 3.0 * lam, trace.V - trace.V2
    return 3.0 * lam, trace.V2 - trace.V


def nonreflecting_residual(U_b, trace: EdgeTrace, side: str, lam: float,
                           params: VesselParams, form: Form = Form.FLOW,
                           order: int = 1, literal: bool = False) -> float:
    """Residual of the (first- or second-order) non-reflecting relation.

    Order 2 uses the one-sided three-point difference (forward on the left,
    backward on the right); in the flow form it reads, on the left,
    3 lam (Q_1 - Q_b) + V_1^Q - V_2^Q = lam_+(U_b) (3 lam (A_1 - A_b) + V_1^A - V_2^A).
    """
    sig = _sigma(side)
    m, e = _difference_data(trace, side, lam, order)
    A_b, X_b = float(U_b[0]), float(U_b[1])
    D = m * (trace.U[0] - A_b) + e[0]
    c2 = sound_speed_sq(A_b, params, literal)
    lhs = m * (trace.U[1] - X_b) + e[1]
    if form is Form.FLOW:
        a = params.alpha
        q = X_b / A_b
        s = a * q + sig * math.sqrt(a * (a - 1.0) * q * q + c2)
    else:
        s = sig * math.sqrt(c2) / A_b
    return lhs - s * D


def _second_from_area(A_b: float, trace: EdgeTrace, side: str, lam: float,
                      params: VesselParams, form: Form, order: int,
                      literal: bool) -> float:
    """Solve the non-reflecting relation for Q_b (or u_b) at given A_b."""
    sig = _sigma(side)
    m, e = _difference_data(trace, side, lam, order)
    D = m * (trace.U[0] - A_b) + e[0]
    a0 = m * trace.U[1] + e[1]
    c2 = sound_speed_sq(A_b, params, literal)
    if form is Form.VELOCITY:
        return (a0 - sig * math.sqrt(c2) / A_b * D) / m
    a = params.alpha
    if a == 1.0:
        den = m + D / A_b
        if den == 0:
            raise BoundaryError("degenerate linear boundary relation")
        return (a0 - sig * math.sqrt(c2) * D) / den
    # a0 - q B = sig D sqrt(a (a-1) q^2 + c2) with Q_b = A_b q
    B = m * A_b + a * D
    if D == 0:
        return a0 / B * A_b
    qa = B * B - D * D * a * (a - 1.0)
    qb = -2.0 * a0 * B
    qc = a0 * a0 - D * D * c2
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        raise BoundaryError(f"no real boundary flow for area {A_b}")
    r = math.sqrt(disc)
    candidates = [(-qb + r) / (2 * qa), (-qb - r) / (2 * qa)]
    # squaring admits roots of the wrong branch; keep those of the right sign
    admissible = [q * A_b for q in candidates
                  if (a0 - q * B) * sig * D >= -1e-10 * (abs(a0) + abs(q * B)) * abs(D)]
    if not admissible:
        raise BoundaryError(f"no admissible root for the boundary flow at area {A_b}")
    return min(admissible, key=lambda Q: abs(Q - trace.U[1]))


def nearest_root(f: Callable[[float], float], x0: float, lo: float, hi: float,
                 growth: float = 1.02) -> float:
    """Root of ``f`` with a sign change closest (geometrically) to ``x0``."""
    f0 = f(x0)
    if f0 == 0:
        return x0
    i = 1
    k = growth
    prev_up = prev_dn = x0
    f_up = f_dn = f0
    while True:
        up, dn = min(x0 * k, hi), max(x0 / k, lo)
        fu = f(up) if up > prev_up else float("nan")
        if np.isfinite(fu) and np.isfinite(f_up) and fu * f_up <= 0:
            return safeguarded_newton(f, prev_up, up)
        fd = f(dn) if dn < prev_dn else float("nan")
        if np.isfinite(fd) and np.isfinite(f_dn) and fd * f_dn <= 0:
            return safeguarded_newton(f, dn, prev_dn)
        if up >= hi and dn <= lo:
            raise BoundaryError(f"no root found in [{lo}, {hi}]")
        if np.isfinite(fu):
            prev_up, f_up = up, fu
        if np.isfinite(fd):
            prev_dn, f_dn = dn, fd
        i += 1
        k = growth ** (i + i * i / 8.0)


def _area_from_relation(second_of_area: Callable[[float], float], trace: EdgeTrace,
                        side: str, lam: float, params: VesselParams, form: Form,
                        order: int, literal: bool) -> np.ndarray:
    """Find A_b such that (A_b, second_of_area(A_b)) satisfies the relation."""

    def f(A):
        if not A > 0:
            return float("nan")
        try:
            return nonreflecting_residual((A, second_of_area(A)), trace, side, lam,
                                          params, form, order, literal)
        except (ValueError, ZeroDivisionError):
            return float("nan")

    A_t = float(trace.U[0])
    try:
        A_b = nearest_root(f, A_t, 1e-3 * A_t, 1e3 * A_t)
    except (BoundaryError, ConvergenceError) as exc:
        raise BoundaryError(f"no positive boundary area ({exc})") from exc
    return np.array([A_b, second_of_area(A_b)])


# -- public boundary operations -----------------------------------------------

def nonreflecting_left(U_1, params: VesselParams, A_L: Optional[float] = None,
                       literal: bool = False) -> np.ndarray:
    """Ghost state on the left; with ``A_L`` given, Q_L solves the relation."""
    U_1 = np.asarray(U_1, float)
    if not U_1[0] > 0:
        raise ValueError("nonpositive trace area")
    if A_L is None:
        return U_1.copy()
    trace = EdgeTrace(U_1, np.zeros(2))
    return np.array([A_L, _second_from_area(A_L, trace, LEFT, 1.0, params,
                                            Form.FLOW, 1, literal)])


def nonreflecting_right(U_N, params: VesselParams, A_R: Optional[float] = None,
                        literal: bool = False) -> np.ndarray:
    U_N = np.asarray(U_N, float)
    if not U_N[0] > 0:
        raise ValueError("nonpositive trace area")
    if A_R is None:
        return U_N.copy()
    trace = EdgeTrace(U_N, np.zeros(2))
    return np.array([A_R, _second_from_area(A_R, trace, RIGHT, 1.0, params,
                                            Form.FLOW, 1, literal)])


def boundary_from_pressure(p_b: float, trace: EdgeTrace, side: str, lam: float,
                           params: VesselParams, form: Form = Form.FLOW,
                           order: int = 1, literal: bool = False) -> BoundaryStates:
    try:
        A_b = pressure_inverse(p_b, params)
    except ValueError as exc:
        raise BoundaryError(f"pressure {p_b} not attainable: {exc}") from exc
    X_b = _second_from_area(A_b, trace, side, lam, params, form, order, literal)
    return _states((A_b, X_b), trace, side, lam)


def boundary_from_velocity(u_b: float, trace: EdgeTrace, side: str, lam: float,
                           params: VesselParams, form: Form = Form.FLOW,
                           order: int = 1, literal: bool = False) -> BoundaryStates:
    if not math.isfinite(u_b):
        raise ValueError("boundary velocity must be finite")
    if form is Form.FLOW:
        second = lambda A: A * u_b  # noqa: E731
    else:
        second = lambda A: u_b  # noqa: E731
    U_b = _area_from_relation(second, trace, side, lam, params, form, order, literal)
    return _states(U_b, trace, side, lam)


def boundary_from_flow(Q_b: float, trace: EdgeTrace, side: str, lam: float,
                       params: VesselParams, form: Form = Form.FLOW,
                       order: int = 1, literal: bool = False) -> BoundaryStates:
    if form is Form.FLOW:
        second = lambda A: Q_b  # noqa: E731
    else:
        second = lambda A: Q_b / A  # noqa: E731
    U_b = _area_from_relation(second, trace, side, lam, params, form, order, literal)
    return _states(U_b, trace, side, lam)


def nonreflecting_order2(trace: EdgeTrace, side: str, lam: float,
                         params: VesselParams, datum: Optional[tuple] = None,
                         form: Form = Form.FLOW, literal: bool = False) -> BoundaryStates:
    """Second-order non-reflecting boundary state.

    ``datum`` is ``None`` (keep the trace area), ``("pressure", p)``,
    ``("velocity", u)`` or ``("flow", Q)``.
    """
    if datum is None:
        A_b = float(trace.U[0])
        X_b = _second_from_area(A_b, trace, side, lam, params, form, 2, literal)
        return _states((A_b, X_b), trace, side, lam)
    kind, value = datum
    if kind == "pressure":
        return boundary_from_pressure(value, trace, side, lam, params, form, 2, literal)
    if kind == "velocity":
        return boundary_from_velocity(value, trace, side, lam, params, form, 2, literal)
    if kind == "flow":
        return boundary_from_flow(value, trace, side, lam, params, form, 2, literal)
    raise ValueError(f"unknown datum kind {kind!r}")


def wall_states(trace: EdgeTrace, side: str, lam: float) -> BoundaryStates:
    """Closed-wall ghost state: zero velocity and zero boundary mass flux.

    V_b^A = 0 together with the Lax curve fixes the ghost area; the second
    component vanishes in both forms.
    """
    sig = _sigma(side)
    A_b = float(trace.U[0] - sig * trace.V[0] / lam)
    return _states((A_b, 0.0), trace, side, lam)


def heart_valve(t: float, trace: EdgeTrace, spec: HeartValve, side: str, lam: float,
                params: VesselParams, form: Form = Form.FLOW,
                literal: bool = False) -> BoundaryStates:
    if spec.is_open(t):
        return boundary_from_pressure(spec.pressure(t), trace, side, lam, params,
                                      form, spec.order, literal)
    return boundary_from_velocity(0.0, trace, side, lam, params, form, spec.order, literal)


def boundary_states(spec: BoundarySpec, t: float, trace: EdgeTrace, side: str,
                    lam: float, params: VesselParams, form: Form = Form.FLOW,
                    literal: bool = False) -> BoundaryStates:
    """Dispatch on the boundary specification."""
    if isinstance(spec, (Neumann, NonReflecting)):
        return BoundaryStates(trace.U.copy(), trace.V.copy())
    if isinstance(spec, NonReflectingOrder2):
        return nonreflecting_order2(trace, side, lam, params, None, form, literal)
    if isinstance(spec, PrescribedPressure):
        return boundary_from_pressure(spec.pressure(t), trace, side, lam, params,
                                      form, spec.order, literal)
    if isinstance(spec, PrescribedVelocity):
        return boundary_from_velocity(spec.velocity(t), trace, side, lam, params,
                                      form, spec.order, literal)
    if isinstance(spec, PrescribedFlow):
        return boundary_from_flow(spec.flow(t), trace, side, lam, params,
                                  form, spec.order, literal)
    if isinstance(spec, Reflecting):
        if spec.conservative:
            return wall_states(trace, side, lam)
        return boundary_from_velocity(0.0, trace, side, lam, params, form,
                                      spec.order, literal)
    if isinstance(spec, HeartValve):
        return heart_valve(t, trace, spec, side, lam, params, form, literal)
    raise TypeError(f"unknown boundary specification {spec!r}")
