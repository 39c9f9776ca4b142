"""Grid-convergence and coupling-error studies.

Every study returns a :class:`StudyReport` holding CSV-ready rows and a
plain-text rendering. The standard setups use the default vessel data
below; all lengths are in cm and times in s.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import boundary as bc
from .config import load_config
from .model import (Grid, RunSettings, VesselParams, equilibrium_state,
                    make_vessel_params)
from .network import Edge, Junction, JunctionRef, Network, junction_errors, run

log = logging.getLogger(__name__)

DEFAULT_CELLS = (50, 100, 200, 400, 800, 1600)
REFERENCE_CELLS = 6400
PULSE_AMPLITUDE = 6.0e4
PULSE_OMEGA = 5.0 * math.pi
# multiplier of A0^{3/2}/sqrt(pi) for the viscoelastic comparison
VISCOELASTIC_GAMMA = 120.0


def baseline_params(length: float = 400.0, **changes) -> VesselParams:
    """Default vessel: A0=6.6, h0=0.26, nu=0.5, E=2.43e6, rho=1.06, alpha=1."""
    p = make_vessel_params(E=2.43e6, h0=0.26, nu=0.5, A0=6.6, rho=1.06, length=length)
    return p.with_changes(**changes) if changes else p


# -- error measures -----------------------------------------------------------

def restrict(fine, n_coarse: int) -> np.ndarray:
    """Average consecutive fine cells onto ``n_coarse`` cells."""
    fine = np.asarray(fine, float)
    if n_coarse <= 0 or fine.size % n_coarse:
        raise ValueError(f"reference with {fine.size} cells is not an integer "
                         f"refinement of {n_coarse} cells")
    return fine.reshape(n_coarse, -1).mean(axis=1)


def l1_error(coarse: Mapping[str, np.ndarray], reference: Mapping[str, np.ndarray],
             quantities: Sequence[str] = ("Q", "A"),
             normalize: bool = False) -> Dict[str, float]:
    """Discrete L1 distance between a coarse solution and a finer reference.

    Both arguments map column names (``x`` and the quantities) to cell
    arrays of one edge. The reference is averaged onto the coarse cells and
    the error is ``dx * sum |q - q_ref|``. With ``normalize`` the result is
    divided by the edge length, i.e. it becomes the mean absolute deviation.

    Raises
    ------
    ValueError
        If the reference grid does not refine the coarse one.
    """
    xc = np.asarray(coarse["x"], float)
    xf = np.asarray(reference["x"], float)
    n = xc.size
    if n < 1:
        raise ValueError("empty coarse grid")
    xr = restrict(xf, n)
    if xf.size < 2:
        raise ValueError("the reference needs at least two cells")
    dx = (xf[1] - xf[0]) * (xf.size // n)
    if not np.allclose(xr, xc, rtol=0.0, atol=1e-9 * max(1.0, dx * n)):
        raise ValueError("coarse and reference grids cover different cells")
    length = dx * n
    out = {}
    for q in quantities:
        e = dx * float(np.sum(np.abs(np.asarray(coarse[q], float) - restrict(reference[q], n))))
        out[q] = e / length if normalize else e
    return out


def eoc(e1: float, e2: float) -> float:
    """Experimental order log2(e1/e2) of two errors on successive grids."""
    if not (e1 > 0 and e2 > 0):
        raise ValueError(f"errors must be positive, got {e1} and {e2}")
    return math.log2(e1 / e2)


def total_variation(a) -> float:
    return float(np.sum(np.abs(np.diff(np.asarray(a, float)))))


# -- standard setups ------------------------------------------------------------

def gaussian_network(n: int, order: int = 1, t_end: float = 0.05) -> Network:
    """Smooth area bump on [0, 200] with Neumann ends."""
    p = baseline_params(200.0)
    g = Grid(n, 200.0)
    A = p.A0 + np.exp(-0.005 * (g.centers - 100.0) ** 2)
    s = RunSettings(cfl=1.0, t_end=t_end, order=order,
                    cfl_per_dx=0.2 if order == 2 else None)
    edge = Edge("vessel", p, g, equilibrium_state(A, 0.0, p), bc.Neumann(), bc.Neumann())
    return Network({"vessel": edge}, {}, s)


def pulse_inlet(order: int = 1) -> bc.PrescribedPressure:
    return bc.PrescribedPressure(bc.Sine(PULSE_AMPLITUDE, PULSE_OMEGA), order=order)


def pulse_network(n: int, order: int = 1, t_end: float = 0.1, length: float = 400.0,
                  gamma: float = 0.0, epsilon: float = 0.0,
                  literal_boundary_speed: bool = True) -> Network:
    """Vessel at rest entered by a sinusoidal pressure pulse from the left."""
    p = baseline_params(length, gamma=gamma)
    g = Grid(n, length)
    s = RunSettings(cfl=1.0, t_end=t_end, order=order, epsilon=epsilon,
                    cfl_per_dx=0.2 if order == 2 else None)
    edge = Edge("vessel", p, g, equilibrium_state(np.full(n, p.A0), 0.0, p),
                pulse_inlet(order), bc.Neumann())
    return Network({"vessel": edge}, {}, s, literal_boundary_speed)


COUPLED_CASES = {
    # incoming and outgoing parameter changes relative to the baseline
    "A0": ({"A0": 1.25 * 6.6}, {"A0": 0.75 * 6.6}),
    "E": ({"E": 1.25 * 2.43e6}, {"E": 0.75 * 2.43e6}),
}


def coupled_network(n: int, case: str, t_end: float = 0.5, length: float = 200.0,
                    order: int = 1, literal_boundary_speed: bool = True) -> Network:
    """Two vessels on [-length, 0] and [0, length] joined at x = 0."""
    if case not in COUPLED_CASES:
        raise ValueError(f"unknown coupled case {case!r}; choose from {list(COUPLED_CASES)}")
    c1, c2 = COUPLED_CASES[case]
    p1, p2 = baseline_params(length, **c1), baseline_params(length, **c2)
    e1 = Edge("I", p1, Grid(n, length, -length),
              equilibrium_state(np.full(n, p1.A0), 0.0, p1), pulse_inlet(order),
              JunctionRef("node"))
    e2 = Edge("II", p2, Grid(n, length, 0.0),
              equilibrium_state(np.full(n, p2.A0), 0.0, p2), JunctionRef("node"),
              bc.Neumann())
    s = RunSettings(cfl=1.0, t_end=t_end, order=order,
                    cfl_per_dx=0.2 if order == 2 else None)
    return Network({"I": e1, "II": e2}, {"node": Junction("node", "I", ("II",))}, s,
                   literal_boundary_speed)


# -- study machinery ------------------------------------------------------------

@dataclass
class StudyReport:
    name: str
    columns: List[str]
    rows: List[List[float]]
    notes: List[str] = field(default_factory=list)

    def column(self, name: str) -> List[float]:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow(["" if v is None else (str(v) if isinstance(v, (int, np.integer))
                                              else format(v, ".17g")) for v in r])
        return buf.getvalue()

    def to_text(self) -> str:
        width = max(12, max(len(c) for c in self.columns) + 2)
        lines = [self.name, "".join(c.rjust(width) for c in self.columns)]
        for r in self.rows:
            cells = []
            for v in r:
                if v is None:
                    cells.append("".rjust(width))
                elif isinstance(v, (int, np.integer)):
                    cells.append(str(v).rjust(width))
                else:
                    cells.append(format(v, ".4g").rjust(width))
            lines.append("".join(cells))
        return "\n".join(lines + self.notes) + "\n"

    def write(self, directory) -> List[Path]:
        os.makedirs(directory, exist_ok=True)
        csv_path = Path(directory) / f"{self.name}.csv"
        txt_path = Path(directory) / f"{self.name}.txt"
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        txt_path.write_text(self.to_text(), encoding="utf-8")
        return [csv_path, txt_path]


def _final_edge(builder: Callable[[int], Network], n: int, edge: str):
    net = builder(n)
    rec = run(net, record_diagnostics=False)
    return rec.final.data[edge]


def _map(fn, args, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, *zip(*args)))
    return [fn(*a) for a in args]


def convergence_table(name: str, builder: Callable[[int], Network], edge: str,
                      cells: Sequence[int] = DEFAULT_CELLS,
                      reference_cells: int = REFERENCE_CELLS,
                      quantities: Sequence[str] = ("Q", "A"),
                      normalize: bool = True, jobs: int = 1) -> StudyReport:
    """Errors against a fine reference run and EOCs between successive grids.

    ``builder`` must be a picklable callable when ``jobs > 1``.
    """
    levels = list(cells) + [reference_cells]
    results = _map(_final_edge, [(builder, n, edge) for n in levels], jobs)
    ref = results[-1]
    cols = ["cells"]
    for q in quantities:
        cols += [f"error_{q}", f"eoc_{q}"]
    rows, prev = [], None
    for n, data in zip(cells, results[:-1]):
        err = l1_error(data, ref, quantities, normalize)
        row = [int(n)]
        for q in quantities:
            row += [err[q], None if prev is None else eoc(prev[q], err[q])]
        rows.append(row)
        prev = err
        log.info("%s: %d cells done", name, n)
    return StudyReport(name, cols, rows)


class _Builder:
    """Picklable wrapper binding keyword arguments of a network factory."""

    def __init__(self, factory, **kwargs):
        self.factory = factory
        self.kwargs = kwargs

    def __call__(self, n):
        return self.factory(n, **self.kwargs)


def table1(order: int = 1, cells=DEFAULT_CELLS, reference_cells=REFERENCE_CELLS,
           jobs: int = 1) -> StudyReport:
    return convergence_table(f"table1_order{order}", _Builder(gaussian_network, order=order),
                             "vessel", cells, reference_cells, jobs=jobs)


def table2(order: int = 1, cells=DEFAULT_CELLS, reference_cells=REFERENCE_CELLS,
           literal_boundary_speed: bool = True, jobs: int = 1) -> StudyReport:
    b = _Builder(pulse_network, order=order, literal_boundary_speed=literal_boundary_speed)
    return convergence_table(f"table2_order{order}", b, "vessel", cells, reference_cells,
                             jobs=jobs)


def _coupling_at_end(case: str, n: int, order: int, literal: bool):
    net = coupled_network(n, case, order=order, literal_boundary_speed=literal)
    run(net, record_diagnostics=False)
    return junction_errors(net)["node"]


def table3(order: int = 1, cells=DEFAULT_CELLS, cases: Sequence[str] = ("A0", "E"),
           literal_boundary_speed: bool = True, jobs: int = 1) -> StudyReport:
    """Coupling errors at the node at t = 0.5 for the discontinuous-A0 and -E setups."""
    args = [(c, n, order, literal_boundary_speed) for c in cases for n in cells]
    flat = _map(_coupling_at_end, args, jobs)
    cols = ["cells"]
    for c in cases:
        cols += [f"e1_{c}", f"eoc_e1_{c}", f"e2_{c}", f"eoc_e2_{c}"]
    rows = []
    for i, n in enumerate(cells):
        row = [int(n)]
        for k, c in enumerate(cases):
            e1, e2 = flat[k * len(cells) + i]
            if i == 0:
                row += [e1, None, e2, None]
            else:
                p1, p2 = flat[k * len(cells) + i - 1]
                row += [e1, eoc(p1, e1), e2, eoc(p2, e2)]
        rows.append(row)
    return StudyReport(f"table3_order{order}", cols, rows)


def viscoelastic_compare(order: int = 1, n: int = 800, t_end: float = 0.4) -> StudyReport:
    """Pulse run with and without the viscoelastic wall term."""
    A0 = baseline_params().A0
    gamma = VISCOELASTIC_GAMMA * A0 ** 1.5 / math.sqrt(math.pi)
    rows = []
    for g in (0.0, gamma):
        d = run(pulse_network(n, order, t_end=t_end, gamma=g),
                record_diagnostics=False).final.data["vessel"]
        rows.append([g, float(np.max(d["Q"])), float(np.max(d["A"])),
                     total_variation(d["A"]), total_variation(d["Q"])])
    return StudyReport(f"viscoelastic_order{order}",
                       ["gamma", "max_Q", "max_A", "tv_A", "tv_Q"], rows)


def custom_study(config_path, cells: Sequence[int], reference_cells: int,
                 overrides: Optional[dict] = None, jobs: int = 1) -> List[StudyReport]:
    """Convergence of every edge of a configured network against a reference.

    Cell counts apply to all edges; each level must divide the reference.
    """
    base = dict(overrides or {})
    levels = list(cells) + [reference_cells]
    finals = []
    for n in levels:
        cfg = load_config(config_path, {**base, "n_cells": n})
        finals.append(run(cfg.network, record_diagnostics=False).final.data)
    reports = []
    for eid in sorted(finals[-1]):
        rows, prev = [], None
        for n, data in zip(cells, finals[:-1]):
            err = l1_error(data[eid], finals[-1][eid], normalize=True)
            rows.append([int(n), err["Q"], None if prev is None else eoc(prev["Q"], err["Q"]),
                         err["A"], None if prev is None else eoc(prev["A"], err["A"])])
            prev = err
        reports.append(StudyReport(f"custom_{eid}",
                                   ["cells", "error_Q", "eoc_Q", "error_A", "eoc_A"], rows))
    return reports


STUDIES = ("table1", "table2", "table3", "viscoelastic-compare", "custom")


def run_study(name: str, order: int = 1, cells: Optional[Sequence[int]] = None,
              reference_cells: int = REFERENCE_CELLS, config=None,
              overrides: Optional[dict] = None, jobs: int = 1) -> List[StudyReport]:
    """Dispatch a named study and return its reports."""
    if name not in STUDIES:
        raise ValueError(f"unknown study {name!r}; choose from {', '.join(STUDIES)}")
    cells = tuple(cells) if cells else DEFAULT_CELLS
    if name == "table1":
        return [table1(order, cells, reference_cells, jobs)]
    if name == "table2":
        return [table2(order, cells, reference_cells, jobs=jobs)]
    if name == "table3":
        return [table3(order, cells, jobs=jobs)]
    if name == "viscoelastic-compare":
        return [viscoelastic_compare(order)]
    if config is None:
        raise ValueError("the custom study needs a configuration file")
    return custom_study(config, cells, reference_cells, overrides, jobs)
