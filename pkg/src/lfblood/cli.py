"""Command-line entry point.

Subcommands::

    lfblood run CONFIG [--cfl C] [--cells N] [--epsilon E] [--order K] [--out DIR]
    lfblood study NAME [--order K] [--cells 50,100,...] [--out DIR]
    lfblood validate CONFIG

Exit codes: 0 on success, 2 for invalid input, 3 for solver failures.
Results go to ``--out``, else to the configured ``run.output_dir``, else to
``$LFBLOOD_OUTPUT_DIR``, else to ``./lfblood-output``. Logs are written to
standard error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from .config import ConfigError, load_config
from .network import SimulationError, run
from .output import write_snapshot_csv
from .studies import REFERENCE_CELLS, STUDIES, run_study

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
OUTPUT_ENV = "LFBLOOD_OUTPUT_DIR"

log = logging.getLogger("lfblood")


def _cells_list(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 2 for v in vals):
        raise argparse.ArgumentTypeError("cell counts must be at least 2")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfblood",
                                 description="Blood flow on vessel networks with a "
                                             "relaxation Lax-Friedrichs scheme.")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="more log output (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--cfl", type=float, help="Courant number in (0, 1]")
        p.add_argument("--cells", type=int, help="cells per edge")
        p.add_argument("--epsilon", type=float, help="relaxation parameter (0 = limit)")
        p.add_argument("--order", type=int, choices=(1, 2), help="scheme order")

    p_run = sub.add_parser("run", help="simulate a configured network")
    p_run.add_argument("config")
    overrides(p_run)
    p_run.add_argument("--out", help="output directory for snapshot CSV files")

    p_val = sub.add_parser("validate", help="check a configuration without running it")
    p_val.add_argument("config")

    p_st = sub.add_parser("study", help="run a convergence or comparison study")
    p_st.add_argument("name", choices=STUDIES)
    p_st.add_argument("--order", type=int, choices=(1, 2), default=1)
    p_st.add_argument("--cells", type=_cells_list, help="grid levels, e.g. 50,100,200")
    p_st.add_argument("--ref-cells", type=int, default=REFERENCE_CELLS,
                      help="cells of the reference solution")
    p_st.add_argument("--config", help="configuration for the custom study")
    p_st.add_argument("--cfl", type=float, help="Courant number (custom study)")
    p_st.add_argument("--epsilon", type=float, help="relaxation parameter (custom study)")
    p_st.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_st.add_argument("--out", help="output directory for the report")
    return ap


def _overrides(args) -> dict:
    out = {}
    for key in ("cfl", "epsilon", "order"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    if getattr(args, "cells", None) is not None and args.command == "run":
        out["n_cells"] = args.cells
    return out


def _output_dir(args, configured: Optional[str] = None) -> str:
    return args.out or configured or os.environ.get(OUTPUT_ENV) or "lfblood-output"


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    net = cfg.network
    print(f"{args.config}: ok ({len(net.edges)} edges, {len(net.junctions)} junctions)")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    out = _output_dir(args, cfg.run.output_dir)
    rec = run(cfg.network)
    paths = write_snapshot_csv(rec, out)
    log.info("wrote %d snapshot files to %s", len(paths), out)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_study(args) -> int:
    ov = {k: getattr(args, k) for k in ("cfl", "epsilon") if getattr(args, k) is not None}
    if args.name == "custom":
        ov["order"] = args.order
    reports = run_study(args.name, order=args.order, cells=args.cells,
                        reference_cells=args.ref_cells, config=args.config,
                        overrides=ov, jobs=args.jobs)
    out = _output_dir(args)
    for r in reports:
        r.write(out)
        sys.stdout.write(r.to_text())
    log.info("reports written to %s", out)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "validate": cmd_validate, "study": cmd_study}[args.command]
    try:
        return handler(args)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except (SimulationError, ArithmeticError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
