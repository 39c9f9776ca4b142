"""Lockstep time integration of a vessel network.

Each step has two phases: first every boundary and junction computes ghost
states from the data at the current time level, then every edge is updated
with those ghost states. All edges share one time step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from . import boundary as bc
from .coupling import (CouplingError, Endpoint, coupling_errors, couple_one_to_one,
                       couple_one_to_one_velocity, couple_one_to_two)
from .model import (EdgeState, FixedLambda, Form, Grid, InitialMinimal,
                    MinimalPerStep, RunSettings, VesselParams)
from .physics import char_speeds_state, pressure
from .scheme import PositivityError, step_limit, step_relaxation
from .viscoelastic import viscoelastic_step

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A solver failure annotated with the place and time it happened."""


@dataclass(frozen=True)
class JunctionRef:
    junction_id: str


@dataclass
class Edge:
    id: str
    params: VesselParams
    grid: Grid
    state: EdgeState
    left: Union[bc.BoundarySpec, JunctionRef]
    right: Union[bc.BoundarySpec, JunctionRef]

    @property
    def form(self) -> Form:
        return self.state.form


@dataclass
class Junction:
    """Coupling node; the incoming edge ends here, outgoing edges start here."""

    id: str
    incoming: str
    outgoing: Tuple[str, ...]

    @property
    def kind(self) -> str:
        return "one_to_one" if len(self.outgoing) == 1 else "one_to_two"


@dataclass
class Network:
    edges: Dict[str, Edge]
    junctions: Dict[str, Junction] = field(default_factory=dict)
    settings: RunSettings = field(default_factory=RunSettings)
    literal_boundary_speed: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        for e in self.edges.values():
            if e.grid.n_cells != e.state.n_cells:
                raise ValueError(f"edge {e.id}: grid and state sizes differ")
            if e.form is Form.VELOCITY and e.params.alpha != 1.0:
                raise ValueError(f"edge {e.id}: velocity form requires alpha = 1")
            if e.params.gamma > 0 and (e.form is Form.VELOCITY or self.settings.epsilon > 0):
                raise ValueError(f"edge {e.id}: viscoelasticity needs the flow form "
                                 "and the limit scheme")
            for side, end in ((bc.LEFT, e.left), (bc.RIGHT, e.right)):
                if isinstance(end, JunctionRef) and end.junction_id not in self.junctions:
                    raise ValueError(f"edge {e.id}: unknown junction {end.junction_id!r}")
        for j in self.junctions.values():
            if len(j.outgoing) not in (1, 2):
                raise ValueError(f"junction {j.id}: need one or two outgoing edges")
            ends = [(j.incoming, bc.RIGHT)] + [(o, bc.LEFT) for o in j.outgoing]
            for eid, side in ends:
                if eid not in self.edges:
                    raise ValueError(f"junction {j.id}: unknown edge {eid!r}")
                end = getattr(self.edges[eid], side)
                if not (isinstance(end, JunctionRef) and end.junction_id == j.id):
                    raise ValueError(f"junction {j.id}: edge {eid} {side} end is not "
                                     "bound to it")
            forms = {self.edges[eid].form for eid, _ in ends}
            if len(forms) > 1:
                raise ValueError(f"junction {j.id}: mixed model forms")
            if Form.VELOCITY in forms and j.kind != "one_to_one":
                raise ValueError(f"junction {j.id}: velocity form supports one-to-one only")

    @property
    def t(self) -> float:
        return next(iter(self.edges.values())).state.t


@dataclass
class Snapshot:
    t: float
    data: Dict[str, Dict[str, np.ndarray]]


@dataclass
class SimulationRecord:
    snapshots: List[Snapshot] = field(default_factory=list)
    lam: List[float] = field(default_factory=list)
    dt: List[float] = field(default_factory=list)
    coupling_errors: Dict[str, List[Tuple[float, float, float]]] = field(default_factory=dict)

    def at(self, t: float) -> Snapshot:
        for s in self.snapshots:
            if s.t == t:
                return s
        raise KeyError(f"no snapshot at t={t}")

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


def snapshot(net: Network) -> Snapshot:
    data = {}
    for eid, e in net.edges.items():
        A = e.state.A.copy()
        data[eid] = {"x": e.grid.centers, "A": A, "Q": e.state.Q.copy(),
                     "p": np.asarray(pressure(A, e.params)), "u": e.state.u.copy()}
    return Snapshot(net.t, data)


def minimal_lambda(net: Network) -> float:
    lam = 0.0
    for e in net.edges.values():
        if e.form is Form.FLOW:
            p = e.params
            lam = max(lam, _kernels.max_speed(e.state.A, e.state.Q, p.beta, p.rho, p.alpha))
            continue
        lo, hi = char_speeds_state(e.state.U, e.params, e.form)
        lam = max(lam, float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
    return lam


def step_size(net: Network, lam: float) -> float:
    s = net.settings
    dt = math.inf
    for e in net.edges.values():
        dx = e.grid.dx
        cfl = s.cfl if s.cfl_per_dx is None else min(s.cfl, s.cfl_per_dx * dx)
        dt = min(dt, cfl * dx / lam)
    return dt


def _endpoint(net: Network, eid: str, side: str) -> Endpoint:
    e = net.edges[eid]
    return Endpoint(bc.edge_trace(e.state, side), e.params)


def ghost_states(net: Network, lam: float) -> Dict[Tuple[str, str], bc.BoundaryStates]:
    """Phase 1: ghost states for every edge end at the current time level."""
    t = net.t
    ghosts = {}
    for eid, e in net.edges.items():
        for side in (bc.LEFT, bc.RIGHT):
            spec = getattr(e, side)
            if isinstance(spec, JunctionRef):
                continue
            try:
                ghosts[(eid, side)] = bc.boundary_states(
                    spec, t, bc.edge_trace(e.state, side), side, lam, e.params,
                    e.form, net.literal_boundary_speed)
            except (bc.BoundaryError, ValueError, ArithmeticError) as exc:
                raise SimulationError(f"boundary {eid}/{side} at t={t:.9g}: {exc}") from exc
    for j in net.junctions.values():
        inc = _endpoint(net, j.incoming, bc.RIGHT)
        outs = [_endpoint(net, o, bc.LEFT) for o in j.outgoing]
        try:
            if j.kind == "one_to_one":
                if net.edges[j.incoming].form is Form.VELOCITY:
                    sR, sL = couple_one_to_one_velocity(inc, outs[0], lam)
                else:
                    sR, sL = couple_one_to_one(inc, outs[0], lam)
                ghosts[(j.incoming, bc.RIGHT)] = sR
                ghosts[(j.outgoing[0], bc.LEFT)] = sL
            else:
                s1, s2, s3 = couple_one_to_two(inc, outs[0], outs[1], lam)
                ghosts[(j.incoming, bc.RIGHT)] = s1
                ghosts[(j.outgoing[0], bc.LEFT)] = s2
                ghosts[(j.outgoing[1], bc.LEFT)] = s3
        except (CouplingError, ValueError, ArithmeticError) as exc:
            raise SimulationError(f"junction {j.id} at t={t:.9g}: {exc}") from exc
    return ghosts


def advance(net: Network, dt: float, lam: float,
            t_new: Optional[float] = None) -> Network:
    """Advance every edge by ``dt`` in place and return the network.

    ``t_new`` overrides the new time (used to land exactly on output times).
    """
    s = net.settings
    ghosts = ghost_states(net, lam)
    t_new = net.t + dt if t_new is None else t_new
    new_states = {}
    for eid, e in net.edges.items():
        gl = ghosts[(eid, bc.LEFT)]
        gr = ghosts[(eid, bc.RIGHT)]
        left, right = (gl.U, gl.V), (gr.U, gr.V)
        try:
            if s.epsilon > 0:
                st = step_relaxation(e.state, e.params, dt, lam, s.epsilon,
                                     left, right, e.grid.dx)
            else:
                st = step_limit(e.state, e.params, dt, lam, left, right,
                                e.grid.dx, s.order)
            if e.params.gamma > 0:
                lv = gl.U[1] if getattr(e.left, "dirichlet_q", False) else None
                rv = gr.U[1] if getattr(e.right, "dirichlet_q", False) else None
                st = viscoelastic_step(st, e.state.A, dt, e.grid.dx, e.params, lv, rv)
        except (PositivityError, ArithmeticError, ValueError) as exc:
            raise SimulationError(f"edge {eid}: {exc}") from exc
        st.t = t_new
        new_states[eid] = st
    for eid, st in new_states.items():
        net.edges[eid].state = st
    return net


def junction_errors(net: Network) -> Dict[str, Tuple[float, float]]:
    out = {}
    for j in net.junctions.values():
        if j.kind != "one_to_one" or net.edges[j.incoming].form is not Form.FLOW:
            continue
        ein, eout = net.edges[j.incoming], net.edges[j.outgoing[0]]
        out[j.id] = coupling_errors(ein.state.U[:, -1], ein.params,
                                    eout.state.U[:, 0], eout.params)
    return out


def _resolve_lambda(net: Network, frozen: Optional[float]) -> float:
    policy = net.settings.lambda_policy
    bound = minimal_lambda(net)
    if isinstance(policy, MinimalPerStep):
        return bound * (1.0 + policy.margin)
    lam = frozen
    if lam < bound * (1.0 - 1e-12):
        raise SimulationError(f"relaxation speed {lam:.6g} violates the "
                              f"subcharacteristic bound {bound:.6g} at t={net.t:.9g}")
    return lam


def run(net: Network, output_times: Optional[Sequence[float]] = None,
        record_diagnostics: bool = True) -> SimulationRecord:
    """Integrate up to ``settings.t_end`` recording snapshots.

    Snapshots are taken at every requested output time inside ``[t, t_end]``
    (steps are shortened to hit them exactly) and always at ``t_end``.
    """
    s = net.settings
    times = sorted(set(float(x) for x in (output_times if output_times is not None
                                          else s.output_times) if x <= s.t_end))
    if not times or times[-1] != s.t_end:
        times.append(s.t_end)
    rec = SimulationRecord()
    policy = s.lambda_policy
    frozen = None
    if isinstance(policy, FixedLambda):
        frozen = policy.value
    elif isinstance(policy, InitialMinimal):
        frozen = minimal_lambda(net) * policy.factor
    pending = [x for x in times if x >= net.t]
    if pending and pending[0] == net.t:
        rec.snapshots.append(snapshot(net))
        pending.pop(0)
    while pending:
        lam = _resolve_lambda(net, frozen)
        dt = step_size(net, lam)
        target = pending[0]
        t_new = None
        if net.t + dt >= target * (1.0 - 1e-14) or net.t + dt >= target - 1e-15:
            dt = target - net.t
            t_new = target
        advance(net, dt, lam, t_new)
        if record_diagnostics:
            rec.lam.append(lam)
            rec.dt.append(dt)
            for jid, (e1, e2) in junction_errors(net).items():
                rec.coupling_errors.setdefault(jid, []).append((net.t, e1, e2))
        if net.t == target:
            rec.snapshots.append(snapshot(net))
            pending.pop(0)
    return rec
