"""Command-line entry point.

Subcommands: ``run-main``, ``run-ablation``, ``verify``, ``decode``.
Exit codes: 0 success, 1 check or runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness
from .optimizer import TrainConfig, greedy_decode
from .sketch import Specification, parse, render


def _add_train_flags(sub):
    sub.add_argument("--lr", type=float, default=0.1, help="learning rate")
    sub.add_argument("--iters", type=int, default=10000, help="iteration budget")
    sub.add_argument("--lambda", dest="population", type=int, default=50,
                     help="population size per gradient estimate")
    sub.add_argument("--log-every", type=int, default=10)
    sub.add_argument("--sketch", help="path to a sketch file overriding the default")
    sub.add_argument("--out", default="runs", help="output directory")


def _config(args, seed):
    return TrainConfig(iterations=args.iters, learning_rate=args.lr,
                       population=args.population, seed=seed,
                       log_every=args.log_every)


def _sketch_text(args):
    if args.sketch:
        with open(args.sketch, encoding="utf-8") as fh:
            return fh.read()
    return None


def _parse_seeds(text):
    return tuple(int(s) for s in text.split(","))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="disnes",
        description="Discrete evolution-strategy hole filling for program sketches.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("run-main", help="single-input induction experiment")
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--estimator", choices=sorted(harness.ARM_KINDS),
                   action="append", dest="arms",
                   help="arm to run (repeatable; default: nes and vo)")

    p = subs.add_parser("run-ablation", help="learning-rate sweep, nes vs sg arms")
    _add_train_flags(p)
    p.add_argument("--seed", default="1", help="comma-separated seed list")
    p.add_argument("--estimator", choices=sorted(harness.ARM_KINDS),
                   action="append", dest="arms")

    p = subs.add_parser("verify", help="distribution and estimator checks")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--estimates", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = subs.add_parser("decode", help="render the greedy program from a snapshot")
    p.add_argument("--params", required=True, help="params snapshot JSON")
    p.add_argument("--sketch", required=True, help="sketch file the snapshot trains")

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run-main":
            arms = tuple(args.arms) if args.arms else harness.MAIN_ARMS
            results = harness.run_main(
                args.seed, args.out, config=_config(args, args.seed),
                sketch_text=_sketch_text(args), arms=arms)
            harness.emit_summary(results, f"{args.out}/summary.csv")
            for r in results:
                print(f"{r.arm}: final greedy MSE {r.final_loss:.6g} "
                      f"outputs {[float(v) for v in r.final_outputs]}")
            return 0

        if args.command == "run-ablation":
            seeds = _parse_seeds(args.seed)
            arms = tuple(args.arms) if args.arms else harness.ABLATION_ARMS
            results = harness.run_ablation(
                seeds, args.out, config=_config(args, seeds[0]),
                sketch_text=_sketch_text(args), arms=arms)
            harness.emit_summary(results, f"{args.out}/summary.csv")
            for r in results:
                print(f"{r.arm} lr={r.learning_rate:g} seed={r.seed}: "
                      f"final greedy MSE {r.final_loss:.6g}")
            return 0

        if args.command == "verify":
            checks = harness.verify(samples=args.samples, cases=args.cases,
                                    oracle_estimates=args.estimates,
                                    seed=args.seed)
            print(harness.format_report(checks))
            return 0 if all(c.passed for c in checks) else 1

        if args.command == "decode":
            with open(args.sketch, encoding="utf-8") as fh:
                program = parse(fh.read())
            with open(args.params, encoding="utf-8") as fh:
                hole_ids, params = harness.params_from_json(fh.read())
            if hole_ids != program.hole_ids():
                print("params snapshot does not match the sketch's holes",
                      file=sys.stderr)
                return 2
            assignment = dict(zip(hole_ids, greedy_decode(params)))
            sys.stdout.write(render(program, assignment))
            return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
