"""Command line entry point ``pressure-lab``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig, list_experiments, run


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pressure-lab", description="Pressure regularity experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="JSON experiment config")
    src.add_argument("--experiment", help="experiment name (see list-experiments)")
    r.add_argument("--theta", type=float, action="append", help="repeatable")
    r.add_argument("--grid", type=int, action="append", help="repeatable")
    r.add_argument("--seed", type=int, action="append", help="repeatable")
    r.add_argument("--out", help="output directory (overrides the config)")

    sub.add_parser("list-experiments", help="list the named experiments")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--out", help="write experiment CSVs here")
    return ap


def _run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_text(args.config.read_text())
        kw = cfg.payload()
    else:
        kw = {"experiment": args.experiment, "thetas": (), "grids": (), "seeds": (), "overrides": {}, "out_dir": None}
    if args.theta:
        kw["thetas"] = tuple(args.theta)
    if args.grid:
        kw["grids"] = tuple(args.grid)
    if args.seed:
        kw["seeds"] = tuple(args.seed)
    kw["out_dir"] = args.out or kw.get("out_dir") or "results"
    cfg = ExperimentConfig(**kw)
    report = run(cfg)
    for f in report.files:
        print(f)
    for row in report.summary:
        print(", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    for fail in report.failures:
        print(f"FAILED theta={fail['theta']} seed={fail['seed']}: {fail['error']}: {fail['message']}", file=sys.stderr)
    return 0 if report.ok else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "list-experiments":
            for name, claim in list_experiments():
                print(f"{name:22s} {claim}")
            return 0
        if args.command == "run":
            return _run(args)
        from .acceptance import verify

        only = [int(s) for s in args.only.split(",")] if args.only else None
        results = verify(only, args.out)
        return 0 if all(r.passed for r in results) else 1
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
