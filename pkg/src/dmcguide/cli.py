"""Command-line entry point: ``dmcguide simulate | fieldmap | sweep``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from .scenario import (
    Grid,
    ScenarioError,
    fieldmap,
    load_scenario_file,
    save_run,
    sweep,
    with_seed,
    write_fieldmap,
    write_sweep,
)
from .sim import run

log = logging.getLogger("dmcguide")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmcguide", description="DMC-constrained guidance around engagement zones")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario, write trajectory.csv and metrics.json")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=None)

    f = sub.add_parser("fieldmap", help="grid of |DMC| for a fixed heading")
    f.add_argument("--scenario", required=True)
    f.add_argument("--heading-deg", type=float, required=True)
    for name in ("xmin", "xmax", "ymin", "ymax"):
        f.add_argument(f"--{name}", type=float, required=True)
    f.add_argument("--nx", type=int, required=True)
    f.add_argument("--ny", type=int, required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--mode", choices=("penetration", "stayout"), default=None)

    w = sub.add_parser("sweep", help="run a scenario for several DMC thresholds")
    w.add_argument("--scenario", required=True)
    w.add_argument("--epsilons-deg", type=_float_list, required=True)
    w.add_argument("--out", required=True)
    return p


def _simulate(args) -> int:
    scn = load_scenario_file(args.scenario)
    if args.seed is not None:
        scn = with_seed(scn, args.seed)
    record = run(scn, seed=args.seed)
    traj, met = save_run(record, scn, args.out)
    log.info("wrote %s and %s", traj, met)
    print(json.dumps(record.metrics()))
    return EXIT_OK


def _fieldmap(args) -> int:
    scn = load_scenario_file(args.scenario)
    try:
        grid = Grid(args.xmin, args.xmax, args.ymin, args.ymax, args.nx, args.ny)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    fm = fieldmap(scn, math.radians(args.heading_deg), grid, args.mode)
    write_fieldmap(fm, args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def _sweep(args) -> int:
    scn = load_scenario_file(args.scenario)
    for e in args.epsilons_deg:
        if not 0 <= e < 180:
            raise ScenarioError(f"epsilon {e} deg outside [0, 180)")
    rows = sweep(scn, args.epsilons_deg)
    write_sweep(rows, args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"simulate": _simulate, "fieldmap": _fieldmap, "sweep": _sweep}[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
