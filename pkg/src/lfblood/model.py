"""Domain types shared by the solver modules.

All quantities are in CGS units (cm, g, s, dyne).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np


class Form(enum.Enum):
    """Choice of conserved variables on an edge."""

    FLOW = "flow"          # U = (A, Q)
    VELOCITY = "velocity"  # U = (A, u), alpha = 1 only


def wall_stiffness(E: float, h0: float, nu: float, A0: float) -> float:
    """beta = sqrt(pi) h0 E / ((1 - nu^2) A0)."""
    return math.sqrt(math.pi) * h0 * E / ((1.0 - nu * nu) * A0)


def profile_exponent(alpha: float) -> Optional[float]:
    """Hagen-Poiseuille profile exponent psi for a momentum-flux coefficient.

    Returns None for alpha == 1 (flat profile, psi -> infinity).
    """
    if alpha == 1.0:
        return None
    return (2.0 - alpha) / (alpha - 1.0)


def alpha_from_psi(psi: float) -> float:
    return (psi + 2.0) / (psi + 1.0)


@dataclass(frozen=True)
class VesselParams:
    """Physical and wall parameters of one vessel segment.

    Use :func:`make_vessel_params` to build an instance from the Young
    modulus, or construct directly with a known ``beta``.
    """

    A0: float
    beta: float
    rho: float = 1.06
    alpha: float = 1.0
    mu: float = 0.0
    gamma: float = 0.0
    Pext: float = 0.0
    length: float = 1.0
    E: Optional[float] = None
    h0: Optional[float] = None
    nu: Optional[float] = None

    def __post_init__(self):
        if not self.A0 > 0:
            raise ValueError(f"A0 must be positive, got {self.A0}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if not 1.0 <= self.alpha < 2.0:
            raise ValueError(f"alpha must lie in [1, 2), got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.mu < 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if self.nu is not None and not 0.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")

    @property
    def psi(self) -> Optional[float]:
        return profile_exponent(self.alpha)

    def with_changes(self, **changes) -> "VesselParams":
        """Copy with fields replaced; beta is recomputed when wall data change."""
        wall = {"E", "h0", "nu", "A0"}
        if wall & changes.keys() and "beta" not in changes and self.E is not None:
            merged = {k: changes.get(k, getattr(self, k)) for k in wall}
            changes["beta"] = wall_stiffness(**merged)
        return replace(self, **changes)


def make_vessel_params(E: float, h0: float, nu: float, A0: float, rho: float,
                       alpha: float = 1.0, mu: float = 0.0, gamma: float = 0.0,
                       Pext: float = 0.0, length: float = 1.0) -> VesselParams:
    if not A0 > 0:
        raise ValueError(f"A0 must be positive, got {A0}")
    if h0 < 0 or E < 0:
        raise ValueError("wall thickness and Young modulus must be nonnegative")
    if not 0.0 <= nu < 1.0:
        raise ValueError(f"nu must lie in [0, 1), got {nu}")
    return VesselParams(A0=A0, beta=wall_stiffness(E, h0, nu, A0), rho=rho,
                        alpha=alpha, mu=mu, gamma=gamma, Pext=Pext,
                        length=length, E=E, h0=h0, nu=nu)


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[x_left, x_left + length]`` into ``n_cells``."""

    n_cells: int
    length: float
    x_left: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.n_cells}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def x_right(self) -> float:
        return self.x_left + self.length


@dataclass
class EdgeState:
    """Cell averages of U and of the auxiliary relaxation variable V.

    ``U`` and ``V`` have shape ``(2, n_cells)``. Row 1 of ``U`` holds Q for the
    flow form and u for the velocity form.
    """

    U: np.ndarray
    V: np.ndarray
    t: float = 0.0
    form: Form = Form.FLOW

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        if self.U.ndim != 2 or self.U.shape[0] != 2:
            raise ValueError(f"U must have shape (2, n), got {self.U.shape}")
        if self.V.shape != self.U.shape:
            raise ValueError("U and V must have the same shape")
        if np.any(~(self.U[0] > 0)):
            j = int(np.argmax(~(self.U[0] > 0)))
            raise ValueError(f"nonpositive area in cell {j}: {self.U[0, j]}")

    @property
    def n_cells(self) -> int:
        return self.U.shape[1]

    @property
    def A(self) -> np.ndarray:
        return self.U[0]

    @property
    def Q(self) -> np.ndarray:
        if self.form is Form.FLOW:
            return self.U[1]
        return self.U[0] * self.U[1]

    @property
    def u(self) -> np.ndarray:
        if self.form is Form.VELOCITY:
            return self.U[1]
        return self.U[1] / self.U[0]

    def copy(self) -> "EdgeState":
        return EdgeState(self.U.copy(), self.V.copy(), self.t, self.form)


def equilibrium_state(A, second, params: VesselParams, form: Form = Form.FLOW,
                      t: float = 0.0) -> EdgeState:
    """EdgeState with V = F(U) (relaxation equilibrium)."""
    from .physics import flux

    if form is Form.VELOCITY and params.alpha != 1.0:
        raise ValueError("the velocity form requires alpha = 1")
    A = np.asarray(A, dtype=float)
    second = np.broadcast_to(np.asarray(second, dtype=float), A.shape)
    U = np.vstack([A, second])
    return EdgeState(U, flux(U, params, form), t, form)


@dataclass(frozen=True)
class FixedLambda:
    """Use the same relaxation speed in every step."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("fixed lambda must be positive")


@dataclass(frozen=True)
class MinimalPerStep:
    """Recompute the smallest admissible relaxation speed before each step."""

    margin: float = 0.0


@dataclass(frozen=True)
class InitialMinimal:
    """Smallest admissible speed of the initial data, frozen for the run.

    ``factor`` scales it; a run aborts if the subcharacteristic condition
    fails later.
    """

    factor: float = 1.0


LambdaPolicy = Union[FixedLambda, MinimalPerStep, InitialMinimal]


@dataclass
class RunSettings:
    cfl: float = 1.0
    t_end: float = 0.0
    order: int = 1
    epsilon: float = 0.0
    lambda_policy: LambdaPolicy = field(default_factory=MinimalPerStep)
    output_times: Sequence[float] = ()
    # order-2 runs can scale the Courant number with the cell width
    cfl_per_dx: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.order not in (1, 2):
            raise ValueError(f"scheme order must be 1 or 2, got {self.order}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
