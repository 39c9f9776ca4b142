"""CSV output of simulation snapshots.

Each snapshot goes to its own file with the columns ``edge_id, x, A, Q, p,
u`` (CGS units). Rows are ordered by edge id and then by position, and
floats carry 17 significant digits so a file read back reproduces the
stored doubles exactly.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Dict, List

import numpy as np

from .network import SimulationRecord, Snapshot

COLUMNS = ("edge_id", "x", "A", "Q", "p", "u")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def snapshot_filename(index: int, t: float, prefix: str = "snapshot") -> str:
    return f"{prefix}_{index:04d}_t{t:.9f}.csv"


def write_snapshot(snap: Snapshot, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for eid in sorted(snap.data):
            d = snap.data[eid]
            order = np.argsort(d["x"], kind="stable")
            for j in order:
                w.writerow([eid] + [_fmt(d[c][j]) for c in COLUMNS[1:]])
    return path


def write_snapshot_csv(record: SimulationRecord, directory,
                       prefix: str = "snapshot") -> List[Path]:
    """Write every snapshot of ``record`` into ``directory``; return the paths."""
    if not record.snapshots:
        raise ValueError("record holds no snapshots")
    os.makedirs(directory, exist_ok=True)
    return [write_snapshot(s, Path(directory) / snapshot_filename(i, s.t, prefix))
            for i, s in enumerate(record.snapshots)]


def read_snapshot_csv(path) -> Dict[str, Dict[str, np.ndarray]]:
    """Read a snapshot file back into per-edge column arrays."""
    rows: Dict[str, Dict[str, list]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in r:
            cols = rows.setdefault(line[0], {c: [] for c in COLUMNS[1:]})
            for c, v in zip(COLUMNS[1:], line[1:]):
                cols[c].append(float(v))
    return {eid: {c: np.array(v) for c, v in cols.items()} for eid, cols in rows.items()}
