"""YAML network configuration.

A configuration document has three top-level sections::

    edges:
      - id: aorta
        length: 400.0            # cm
        x_left: 0.0              # optional, cm
        n_cells: 800
        form: flow               # flow | velocity
        params: {A0: 6.6, E: 2.43e6, h0: 0.26, nu: 0.5, rho: 1.06}
        initial: {type: constant, A: 6.6, Q: 0.0}
        left:  {type: pressure, value: {type: sine, amplitude: 6.0e4, omega: 15.707963}}
        right: {type: neumann}
    junctions:
      - {id: j1, incoming: aorta, outgoing: [branch]}
    run:
      cfl: 1.0
      order: 1
      t_end: 0.1
      epsilon: 0.0
      lambda: {mode: per_step}
      output_times: [0.05, 0.1]
      output_dir: out

All quantities are CGS. ``params`` accepts either the wall data ``E``, ``h0``,
``nu`` or a ready ``beta``. An edge end bound to a junction is written
``{junction: j1}``. Initial conditions are sampled at cell centres.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np
import yaml

from . import boundary as bc
from .model import (EdgeState, FixedLambda, Form, Grid, InitialMinimal, MinimalPerStep,
                    RunSettings, VesselParams, equilibrium_state, make_vessel_params)
from .network import Edge, Junction, JunctionRef, Network


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads YAML 1.2 floats such as ``2.43e6``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                  |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                  |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                  |[-+]?\.(?:inf|Inf|INF)
                  |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


class ConfigError(ValueError):
    """Schema, cross-reference or positivity problem in a configuration.

    ``path`` locates the offending entry, e.g. ``edges[1].params.A0``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _get(node: Mapping, key: str, path: str, kind=None, default: Any = ...):
    if not isinstance(node, Mapping):
        raise ConfigError(path, "expected a mapping")
    if key not in node:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required entry")
        return default
    val = node[key]
    sub = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(sub, f"expected a number, got {val!r}")
        if not math.isfinite(val):
            raise ConfigError(sub, "expected a finite number")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(sub, f"expected an integer, got {val!r}")
        return val
    if kind is str and not isinstance(val, str):
        raise ConfigError(sub, f"expected a string, got {val!r}")
    if kind is list and not isinstance(val, list):
        raise ConfigError(sub, "expected a list")
    if kind is dict and not isinstance(val, Mapping):
        raise ConfigError(sub, "expected a mapping")
    return val


def _check_keys(node: Mapping, allowed, path: str):
    extra = set(node) - set(allowed)
    if extra:
        raise ConfigError(path, f"unknown entries {sorted(extra)}")


# -- time functions -----------------------------------------------------------

def parse_time_function(node, path: str) -> bc.TimeFunction:
    """A number is a constant; mappings select ``sine`` or ``table``."""
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return bc.Constant(float(node))
    kind = _get(node, "type", path, str)
    if kind == "constant":
        _check_keys(node, {"type", "value"}, path)
        return bc.Constant(_get(node, "value", path, float))
    if kind == "sine":
        _check_keys(node, {"type", "amplitude", "omega", "offset", "phase"}, path)
        return bc.Sine(_get(node, "amplitude", path, float), _get(node, "omega", path, float),
                       _get(node, "offset", path, float, 0.0),
                       _get(node, "phase", path, float, 0.0))
    if kind == "table":
        _check_keys(node, {"type", "times", "values"}, path)
        times = _get(node, "times", path, list)
        values = _get(node, "values", path, list)
        try:
            return bc.Tabulated(np.asarray(times, float), np.asarray(values, float))
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.type", f"unknown time function {kind!r}")


# -- boundary specifications --------------------------------------------------

def parse_boundary(node, path: str):
    if not isinstance(node, Mapping):
        raise ConfigError(path, "expected a mapping")
    if "junction" in node:
        _check_keys(node, {"junction"}, path)
        return JunctionRef(_get(node, "junction", path, str))
    kind = _get(node, "type", path, str)
    order = _get(node, "order", path, int, 1)
    if order not in (1, 2):
        raise ConfigError(f"{path}.order", "order must be 1 or 2")
    simple = {"neumann": bc.Neumann, "nonreflecting": bc.NonReflecting,
              "nonreflecting2": bc.NonReflectingOrder2}
    if kind in simple:
        _check_keys(node, {"type"}, path)
        return simple[kind]()
    if kind in ("pressure", "velocity", "flow"):
        _check_keys(node, {"type", "value", "order"}, path)
        fn = parse_time_function(_get(node, "value", path), f"{path}.value")
        cls = {"pressure": bc.PrescribedPressure, "velocity": bc.PrescribedVelocity,
               "flow": bc.PrescribedFlow}[kind]
        return cls(fn, order)
    if kind == "reflecting":
        _check_keys(node, {"type", "order", "conservative"}, path)
        cons = _get(node, "conservative", path, default=True)
        if not isinstance(cons, bool):
            raise ConfigError(f"{path}.conservative", "expected true or false")
        return bc.Reflecting(order, cons)
    if kind == "heart_valve":
        _check_keys(node, {"type", "value", "period", "open_duration", "order"}, path)
        fn = parse_time_function(_get(node, "value", path), f"{path}.value")
        period = _get(node, "period", path, float, None)
        open_d = _get(node, "open_duration", path, float, None)
        if (period is None) != (open_d is None):
            raise ConfigError(path, "period and open_duration must be given together")
        if period is not None and not (period > 0 and 0 <= open_d <= period):
            raise ConfigError(path, "need period > 0 and 0 <= open_duration <= period")
        return bc.HeartValve(fn, period, open_d, order)
    raise ConfigError(f"{path}.type", f"unknown boundary type {kind!r}")


# -- edges ----------------------------------------------------------------------

_PARAM_KEYS = {"A0", "beta", "E", "h0", "nu", "rho", "alpha", "mu", "gamma", "Pext"}


def parse_params(node, length: float, path: str) -> VesselParams:
    _get({"params": node}, "params", "", dict)
    _check_keys(node, _PARAM_KEYS, path)
    A0 = _get(node, "A0", path, float)
    common = dict(rho=_get(node, "rho", path, float, 1.06),
                  alpha=_get(node, "alpha", path, float, 1.0),
                  mu=_get(node, "mu", path, float, 0.0),
                  gamma=_get(node, "gamma", path, float, 0.0),
                  Pext=_get(node, "Pext", path, float, 0.0), length=length)
    wall = [k for k in ("E", "h0", "nu") if k in node]
    try:
        if "beta" in node:
            if wall:
                raise ConfigError(path, "give either beta or E/h0/nu, not both")
            return VesselParams(A0=A0, beta=_get(node, "beta", path, float), **common)
        if len(wall) != 3:
            raise ConfigError(path, "need beta or all of E, h0, nu")
        return make_vessel_params(E=_get(node, "E", path, float),
                                  h0=_get(node, "h0", path, float),
                                  nu=_get(node, "nu", path, float), A0=A0, **common)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


@dataclass(frozen=True)
class ConstantIC:
    A: float
    Q: float = 0.0

    def sample(self, x):
        return np.full_like(x, self.A), np.full_like(x, self.Q)


@dataclass(frozen=True)
class GaussianArea:
    """A = base + amplitude exp(-width_coeff (x - center)^2), constant Q."""

    base: float
    amplitude: float
    center: float
    width_coeff: float
    Q: float = 0.0

    def sample(self, x):
        A = self.base + self.amplitude * np.exp(-self.width_coeff * (x - self.center) ** 2)
        return A, np.full_like(x, self.Q)


@dataclass(frozen=True)
class TabulatedIC:
    x: np.ndarray
    A: np.ndarray
    Q: np.ndarray

    def sample(self, x):
        return np.interp(x, self.x, self.A), np.interp(x, self.x, self.Q)


def parse_initial(node, params: VesselParams, path: str):
    kind = _get(node, "type", path, str)
    if kind == "constant":
        _check_keys(node, {"type", "A", "Q"}, path)
        return ConstantIC(_get(node, "A", path, float, params.A0),
                          _get(node, "Q", path, float, 0.0))
    if kind == "gaussian":
        _check_keys(node, {"type", "base", "amplitude", "center", "width_coeff", "Q"}, path)
        return GaussianArea(_get(node, "base", path, float, params.A0),
                            _get(node, "amplitude", path, float),
                            _get(node, "center", path, float),
                            _get(node, "width_coeff", path, float),
                            _get(node, "Q", path, float, 0.0))
    if kind == "table":
        _check_keys(node, {"type", "x", "A", "Q"}, path)
        try:
            x = np.asarray(_get(node, "x", path, list), float)
            A = np.asarray(_get(node, "A", path, list), float)
            Q = np.asarray(_get(node, "Q", path, list), float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, f"non-numeric samples: {exc}") from exc
        if not (x.size == A.size == Q.size) or x.size < 1:
            raise ConfigError(path, "x, A and Q need the same nonzero length")
        if np.any(np.diff(x) <= 0):
            raise ConfigError(f"{path}.x", "sample positions must increase strictly")
        return TabulatedIC(x, A, Q)
    raise ConfigError(f"{path}.type", f"unknown initial condition {kind!r}")


def initial_state(ic, grid: Grid, params: VesselParams, form: Form, path: str) -> EdgeState:
    A, Q = ic.sample(grid.centers)
    if np.any(~(A > 0)):
        j = int(np.argmax(~(A > 0)))
        raise ConfigError(path, f"initial area not positive in cell {j} (A={A[j]:.6g})")
    second = Q if form is Form.FLOW else Q / A
    return equilibrium_state(A, second, params, form)


def parse_edge(node, path: str) -> Edge:
    _check_keys(node, {"id", "length", "x_left", "n_cells", "form", "params", "initial",
                       "left", "right"}, path)
    eid = str(_get(node, "id", path))
    length = _get(node, "length", path, float)
    n = _get(node, "n_cells", path, int)
    try:
        grid = Grid(n, length, _get(node, "x_left", path, float, 0.0))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    form_name = _get(node, "form", path, str, "flow")
    try:
        form = Form(form_name)
    except ValueError:
        raise ConfigError(f"{path}.form", f"unknown form {form_name!r}") from None
    params = parse_params(_get(node, "params", path, dict), length, f"{path}.params")
    ic = parse_initial(_get(node, "initial", path, dict, {"type": "constant"}), params,
                       f"{path}.initial")
    try:
        state = initial_state(ic, grid, params, form, f"{path}.initial")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}.form", str(exc)) from exc
    left = parse_boundary(_get(node, "left", path, dict), f"{path}.left")
    right = parse_boundary(_get(node, "right", path, dict), f"{path}.right")
    return Edge(eid, params, grid, state, left, right)


# -- run settings ---------------------------------------------------------------

def parse_lambda(node, path: str):
    mode = _get(node, "mode", path, str)
    if mode == "per_step":
        _check_keys(node, {"mode", "margin"}, path)
        return MinimalPerStep(_get(node, "margin", path, float, 0.0))
    if mode == "initial":
        _check_keys(node, {"mode", "factor"}, path)
        return InitialMinimal(_get(node, "factor", path, float, 1.0))
    if mode == "fixed":
        _check_keys(node, {"mode", "value"}, path)
        try:
            return FixedLambda(_get(node, "value", path, float))
        except ValueError as exc:
            raise ConfigError(f"{path}.value", str(exc)) from exc
    raise ConfigError(f"{path}.mode", f"unknown lambda mode {mode!r}")


@dataclass
class RunConfig:
    settings: RunSettings
    output_dir: Optional[str] = None
    literal_boundary_speed: bool = False


def parse_run(node, path: str = "run") -> RunConfig:
    _check_keys(node, {"cfl", "order", "t_end", "epsilon", "lambda", "output_times",
                       "output_dir", "cfl_per_dx", "literal_boundary_speed"}, path)
    times = _get(node, "output_times", path, list, [])
    for i, t in enumerate(times):
        _get({"t": t}, "t", f"{path}.output_times[{i}]", float)
    lit = _get(node, "literal_boundary_speed", path, default=False)
    if not isinstance(lit, bool):
        raise ConfigError(f"{path}.literal_boundary_speed", "expected true or false")
    cpd = _get(node, "cfl_per_dx", path, float, None)
    try:
        settings = RunSettings(
            cfl=_get(node, "cfl", path, float, 1.0),
            t_end=_get(node, "t_end", path, float),
            order=_get(node, "order", path, int, 1),
            epsilon=_get(node, "epsilon", path, float, 0.0),
            lambda_policy=parse_lambda(_get(node, "lambda", path, dict, {"mode": "per_step"}),
                                       f"{path}.lambda"),
            output_times=tuple(float(t) for t in times),
            cfl_per_dx=cpd)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    out = _get(node, "output_dir", path, str, None)
    return RunConfig(settings, out, lit)


# -- whole document -------------------------------------------------------------

@dataclass
class LoadedConfig:
    network: Network
    run: RunConfig


def parse_config(document, overrides: Optional[Dict[str, Any]] = None) -> LoadedConfig:
    """Build a validated network from a parsed document (or YAML text).

    ``overrides`` replaces entries of the ``run`` section (``cfl``,
    ``epsilon``, ``order``) and, for ``n_cells``, the cell count of every
    edge.
    """
    if isinstance(document, str):
        try:
            document = yaml.load(document, Loader=_Loader)
        except yaml.YAMLError as exc:
            raise ConfigError("", f"malformed YAML: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ConfigError("", "document must be a mapping")
    _check_keys(document, {"edges", "junctions", "run"}, "")
    overrides = dict(overrides or {})
    n_cells = overrides.pop("n_cells", None)
    edge_nodes = _get(document, "edges", "", list)
    if not edge_nodes:
        raise ConfigError("edges", "at least one edge is required")
    edges: Dict[str, Edge] = {}
    for i, node in enumerate(edge_nodes):
        path = f"edges[{i}]"
        if not isinstance(node, Mapping):
            raise ConfigError(path, "expected a mapping")
        if n_cells is not None:
            node = {**node, "n_cells": n_cells}
        e = parse_edge(node, path)
        if e.id in edges:
            raise ConfigError(f"{path}.id", f"duplicate edge id {e.id!r}")
        edges[e.id] = e
    junctions: Dict[str, Junction] = {}
    for i, node in enumerate(_get(document, "junctions", "", list, [])):
        path = f"junctions[{i}]"
        _check_keys(node, {"id", "incoming", "outgoing"}, path)
        jid = str(_get(node, "id", path))
        inc = str(_get(node, "incoming", path))
        outs = _get(node, "outgoing", path, list)
        if jid in junctions:
            raise ConfigError(f"{path}.id", f"duplicate junction id {jid!r}")
        for ref, where in [(inc, "incoming")] + [(o, f"outgoing[{k}]")
                                                  for k, o in enumerate(outs)]:
            if str(ref) not in edges:
                raise ConfigError(f"{path}.{where}", f"unknown edge {ref!r}")
        junctions[jid] = Junction(jid, inc, tuple(str(o) for o in outs))
    run_node = dict(_get(document, "run", "", dict))
    run_node.update(overrides)
    run_cfg = parse_run(run_node)
    for e in edges.values():
        for side in (bc.LEFT, bc.RIGHT):
            end = getattr(e, side)
            if isinstance(end, JunctionRef) and end.junction_id not in junctions:
                raise ConfigError(f"edges[{list(edges).index(e.id)}].{side}.junction",
                                  f"unknown junction {end.junction_id!r}")
    try:
        net = Network(edges, junctions, run_cfg.settings, run_cfg.literal_boundary_speed)
    except ValueError as exc:
        raise ConfigError("junctions", str(exc)) from exc
    return LoadedConfig(net, run_cfg)


def load_config(path, overrides: Optional[Dict[str, Any]] = None) -> LoadedConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, overrides)
