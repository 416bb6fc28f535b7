"""Command-line entry point: ``cvkerr list`` and ``cvkerr run --experiment NAME``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import CvKerrError
from .harness import ExperimentConfig, list_experiments, run_experiment

log = logging.getLogger("cvkerr")

EXIT_OK, EXIT_ERROR, EXIT_TOLERANCE = 0, 1, 2

# flag name -> config field
FLAG_FIELDS = {"experiment": "experiment", "dim": "dim", "grid": "n_points", "t": "t",
               "coherent": "coherent", "scheme": "scheme", "mode": "mode", "reps": "reps",
               "seed": "seed", "ancilla": "ancilla", "squeezing": "squeezing", "out": "out",
               "jobs": "jobs"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvkerr", description="Measurement-induced Kerr experiments")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--experiment", "-e")
    r.add_argument("--config", help="JSON file with config fields; flags win on conflict")
    r.add_argument("--dim", type=int)
    r.add_argument("--grid", type=int, help="grid points (power of two)")
    r.add_argument("--t", type=float, help="Kerr amplitude per repetition")
    r.add_argument("--coherent", type=float, help="coherent input amplitude")
    r.add_argument("--scheme", choices=["first", "separated", "q2", "third"])
    r.add_argument("--mode", choices=["direct", "postselect", "deterministic"])
    r.add_argument("--ancilla", choices=["ideal", "first_order", "photon_subtracted"])
    r.add_argument("--squeezing", type=float)
    r.add_argument("--reps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="output directory for report.json / state.csv")
    r.add_argument("--jobs", type=int)
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> ExperimentConfig:
    fields = {}
    if args.config:
        with open(args.config) as fh:
            fields.update(json.load(fh))
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag)
        if val is not None:
            fields[name] = val
    if "experiment" not in fields:
        raise CvKerrError("no experiment given (use --experiment or a config file)")
    return ExperimentConfig.from_dict(fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name:15s} {desc}")
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg)
    except (CvKerrError, OSError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(report.to_json())
    status = "PASS" if report.passed else "FAIL"
    log.info("%s %s log10(eps)=%.4f", status, report.experiment, report.log10_error)
    return EXIT_OK if report.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
