"""Command-line entry point: ``ncer {cluster,eval,sweep,synth,verify}``.

Exit status is 0 on success, 2 for bad input, 3 for numerical failures
(rank deficiency, iteration caps) and 1 when ``verify`` finds a mismatch.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ncer.datasets import KINDS, make_synthetic
from ncer.errors import InputError, NumericalError
from ncer.io import load_data, load_labels, save_labels
from ncer.metrics import accuracy, nmi
from ncer.pipelines import verify_bridge
from ncer.runner import (ALGORITHMS, RunConfig, bridge_passed, bridge_suite, run,
                         sweep_grid)

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _p_value(text):
    if text in ("m", "full"):
        return "m"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be an integer or 'm', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("p must be >= 1")
    return value


def _run_args(sub):
    sub.add_argument("--algo", choices=ALGORITHMS, default="ncer")
    sub.add_argument("--r", type=int, required=True, help="number of clusters")
    sub.add_argument("--kernel-b", type=float, default=0.0)
    sub.add_argument("--kernel-c", type=int, default=1)
    sub.add_argument("--trials", type=int, default=1,
                     help="random initializations for nc / nmf")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--data", required=True, help="dense CSV or IDX3 file")
    sub.add_argument("--labels", help="ground-truth labels (text or IDX1)")
    sub.add_argument("--out", help="JSON report path; per-trial CSV goes next to it")
    sub.add_argument("--shift", type=float, default=0.0, help="add this value to every entry")
    sub.add_argument("--drop-isolated", action="store_true")
    sub.add_argument("--points-as-rows", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="ncer", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    cluster = subs.add_parser("cluster", help="cluster a data set")
    _run_args(cluster)
    cluster.add_argument("--p", type=_p_value, default=5, help="neighbor number, or 'm'")

    sweep = subs.add_parser("sweep", help="repeat clustering over neighbor numbers")
    _run_args(sweep)
    sweep.add_argument("--p", type=_p_value, nargs="+",
                       help="explicit p values (default: 5, s, 2s, ..., m)")
    sweep.add_argument("--step", type=int, help="grid step s (default m // 10)")
    sweep.add_argument("--compare-mer", action="store_true",
                       help="flag which rows reproduce the MER partition")

    ev = subs.add_parser("eval", help="score predicted labels against ground truth")
    ev.add_argument("--labels", required=True)
    ev.add_argument("--pred", required=True)

    synth = subs.add_parser("synth", help="write a seeded synthetic data set")
    synth.add_argument("--kind", choices=KINDS, default="planted-clusters")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--r", type=int, default=3, help="clusters / basis columns")
    synth.add_argument("--points", type=int, help="points per cluster, or m for separable kinds")
    synth.add_argument("--dim", type=int, help="ambient dimension")
    synth.add_argument("--distance", type=float, default=10.0)
    synth.add_argument("--sigma", type=float, default=0.5)
    synth.add_argument("--noise", type=float, help="noise level for near-separable")

    verify = subs.add_parser("verify", help="check NCER (p = m) against ER and MER")
    verify.add_argument("--data", help="check this data set instead of random ones")
    verify.add_argument("--r", type=int, help="clusters, required with --data")
    verify.add_argument("--points-as-rows", action="store_true")
    verify.add_argument("--instances", type=int, default=30)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", help="write the per-instance results as JSON")
    return parser


def _config(args, p, sweep=None, compare_mer=False):
    return RunConfig(
        algorithm=args.algo, r=args.r, data=args.data, p=p, b=args.kernel_b,
        c=args.kernel_c, seed=args.seed, trials=args.trials, sweep=sweep,
        labels=args.labels, out=args.out, shift=args.shift,
        drop_isolated=args.drop_isolated, points_as_rows=args.points_as_rows,
        compare_mer=compare_mer)


def _print(doc):
    print(json.dumps(doc, indent=2, default=float))


def _summary(report):
    return {"algorithm": report.algorithm, "points": report.points,
            "dropped": report.dropped, "seconds": report.seconds,
            "summaries": [{k: v for k, v in s.items() if k != "diagnostics"}
                          for s in report.summaries]}


def cmd_cluster(args):
    report = run(_config(args, args.p), keep_labels=True)
    if args.out:
        out = Path(args.out)
        labels = next(iter(report.labels.values()))
        save_labels(out.with_name(out.stem + ".labels.txt"), labels + 1)
    _print(_summary(report))
    return EXIT_OK


def cmd_sweep(args):
    grid = args.p
    if grid is None:
        m = load_data(args.data, args.points_as_rows).shape[1]
        grid = sweep_grid(m, args.step or max(m // 10, 1))
    report = run(_config(args, grid[0], sweep=grid, compare_mer=args.compare_mer))
    doc = _summary(report)
    if args.compare_mer:
        doc["matches_mer"] = {str(row["p"]): row["matches_mer"] for row in report.trials}
    _print(doc)
    return EXIT_OK


def cmd_eval(args):
    truth = load_labels(args.labels)
    pred = load_labels(args.pred)
    _print({"points": int(truth.size), "ac": accuracy(truth, pred), "nmi": nmi(truth, pred)})
    return EXIT_OK


def cmd_synth(args):
    if args.kind == "planted-clusters":
        params = {"k": args.r, "n": args.points or 30, "d": args.dim or 2,
                  "distance": args.distance, "sigma": args.sigma}
    else:
        params = {"d": args.dim or 20, "m": args.points or 100, "r": args.r}
        if args.noise is not None:
            params["noise_level"] = args.noise
    _print(make_synthetic(args.kind, params, args.seed, args.out))
    return EXIT_OK


def cmd_verify(args):
    if args.data:
        if args.r is None:
            raise InputError("verify --data needs --r")
        check = verify_bridge(load_data(args.data, args.points_as_rows), args.r)
        check["passed"] = bridge_passed(check)
        results = [check]
    else:
        results = bridge_suite(args.instances, args.seed)
    failed = [res.get("instance", 0) for res in results if not res["passed"]]
    doc = {
        "instances": len(results),
        "passed": len(results) - len(failed),
        "failed": failed,
        "max_eigen_singular_dev": max(res["eigen_singular_dev"] for res in results),
        "max_hyperplane_dev": max(res["hyperplane_dev"] for res in results),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2, default=float) + "\n")
    _print(doc)
    return EXIT_MISMATCH if failed else EXIT_OK


COMMANDS = {"cluster": cmd_cluster, "sweep": cmd_sweep, "eval": cmd_eval,
            "synth": cmd_synth, "verify": cmd_verify}


def _where(exc):
    name = getattr(exc, "stage", None)
    return f" in {name}" if name else ""


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"ncer: input error{_where(exc)}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"ncer: numerical failure{_where(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
