"""Command-line entry point: ``ranlab <subcommand> [flags]``.

Results go to standard output (or ``--out``); diagnostics go to stderr.
Exit status: 0 success, 1 parameter error, 2 internal error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

from . import verify
from .apollonian import grow_ran
from .bounds_calc import explicit_constants_dary, explicit_constants_ran
from .dary_tree import CapacityError, grow_tree
from .experiments import (STATISTICS, ExperimentConfig, fit_exponent, read_records,
                          records_to_csv, records_to_jsonl, run_ensemble)
from .paths import (InstanceTooLarge, buono_upper_bound, longest_path_exact,
                    longest_path_heuristic)
from .stochastics import Model, ParameterError, make_rng
from .subtree_dp import (largest_buono_subtree, largest_r_ary_subtree, max_mass_r_ary,
                         sample_weighted_tree)

EXIT_OK, EXIT_PARAM, EXIT_INTERNAL, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_list(text: str) -> list:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RANLAB_SEED")
    if env:
        return int(env)
    seed = secrets.randbits(63)
    print(f"seed={seed}", file=sys.stderr)
    return seed


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _scalar(args, key: str, value, **extra) -> None:
    if args.format == "json":
        _emit(args, json.dumps({key: value, **extra}))
    else:
        _emit(args, str(value))


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: $RANLAB_SEED, else fresh entropy)")
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="result format (default csv / plain)")

    p = Parser(prog="ranlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("gen-tree", parents=[common], help="random d-ary recursive tree edge list")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--t", type=int, required=True)

    s = sub.add_parser("gen-ran", parents=[common], help="random Apollonian network edge list")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--faces-out", default=None, help="also write the live face list here")

    s = sub.add_parser("subtree", parents=[common], help="largest r-ary subtree of T_t")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--witness", action="store_true", help="include the node list (json)")

    s = sub.add_parser("buono", parents=[common], help="largest buono subtree of the Delta-tree")
    s.add_argument("--t", type=int, required=True)

    s = sub.add_parser("longest-path", parents=[common], help="longest path in RAN_t")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--method", choices=("exact", "heuristic"), default="exact")
    s.add_argument("--cap", type=int, default=12, help="largest t for exact search (default 12)")

    s = sub.add_parser("mass", parents=[common], help="max mass over G_{n,r} of a weighted tree")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("verify-bounds", parents=[common], help="explicit constants and their checks")
    s.add_argument("--model", choices=("dary", "ran"), default="ran")
    s.add_argument("--d", type=int, default=None)
    s.add_argument("--r", type=int, default=None)

    s = sub.add_parser("verify-lemmas", parents=[common], help="Monte Carlo checks of the probabilistic bounds")
    s.add_argument("--samples", type=int, default=100_000, help="Monte Carlo sample size")

    s = sub.add_parser("experiment", parents=[common], help="seeded ensemble over a t grid")
    s.add_argument("--model", choices=("dary", "ran"), default="dary")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--t-grid", type=_int_list, required=True, help="comma list, e.g. 1000,10000")
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--stat", action="append", choices=STATISTICS, default=None,
                   help="statistic to record (repeatable; default s_t or buono_bound)")
    s.add_argument("--journal", default=None, help="append records here as they complete")

    s = sub.add_parser("fit", parents=[common], help="fit log statistic against log t")
    s.add_argument("--in", dest="infile", required=True, help="CSV or JSON-lines records")
    s.add_argument("--stat", choices=STATISTICS, required=True)
    s.add_argument("--aggregate", choices=("mean", "log"), default="mean")
    return p


def _model(args) -> Model:
    return Model.dary(args.d, args.r) if args.model == "dary" else Model.ran()


def dispatch(args) -> int:
    cmd = args.command
    if cmd == "gen-tree":
        seed = _resolve_seed(args)
        tree = grow_tree(args.d, args.t, make_rng(seed), seed=seed)
        _emit(args, tree.to_edge_list())
    elif cmd == "gen-ran":
        seed = _resolve_seed(args)
        ran, _ = grow_ran(args.t, make_rng(seed), seed=seed)
        _emit(args, ran.to_edge_list())
        if args.faces_out:
            ran.write_face_list(args.faces_out)
    elif cmd == "subtree":
        seed = _resolve_seed(args)
        tree = grow_tree(args.d, args.t, make_rng(seed), seed=seed)
        w = largest_r_ary_subtree(tree, args.r, witness=args.witness)
        extra = {"nodes": w.nodes} if args.witness else {}
        _scalar(args, "size", w.size, **extra)
    elif cmd == "buono":
        seed = _resolve_seed(args)
        _, delta = grow_ran(args.t, make_rng(seed), seed=seed)
        w = largest_buono_subtree(delta, witness=False)
        _scalar(args, "size", w.size, upper_bound=3 + w.size)
    elif cmd == "longest-path":
        seed = _resolve_seed(args)
        ran, delta = grow_ran(args.t, make_rng(seed), seed=seed)
        if args.method == "exact":
            res = longest_path_exact(ran, delta, cap=args.cap)
        else:
            res = longest_path_heuristic(ran, delta)
        payload = {"length": res.length, "path": res.path, "method": res.method,
                   "upper_bound": buono_upper_bound(delta)}
        _emit(args, json.dumps(payload))
    elif cmd == "mass":
        seed = _resolve_seed(args)
        sample = sample_weighted_tree(args.d, args.r, args.n, make_rng(seed))
        _scalar(args, "max_mass", max_mass_r_ary(sample, args.r, args.n))
    elif cmd == "verify-bounds":
        if args.model == "ran":
            reports = [explicit_constants_ran()]
        elif args.d is not None:
            rs = [args.r] if args.r is not None else range(1, args.d)
            reports = [explicit_constants_dary(args.d, r) for r in rs]
        else:
            reports = [explicit_constants_dary(d, r) for d in range(2, 7) for r in range(1, d)]
        body = [r.to_dict() for r in reports]
        _emit(args, json.dumps(body[0] if len(body) == 1 else body, indent=2))
        if not all(r.all_pass for r in reports):
            return EXIT_VERIFY
    elif cmd == "verify-lemmas":
        seed = _resolve_seed(args)
        results = verify.run_all(samples=args.samples, base_seed=seed)
        for res in results:
            print(f"{'PASS' if res.passed else 'FAIL'} {res.name}", file=sys.stderr)
        _emit(args, json.dumps([res.to_dict() for res in results], indent=2))
        if not all(res.passed for res in results if not res.informational):
            return EXIT_VERIFY
    elif cmd == "experiment":
        seed = _resolve_seed(args)
        model = _model(args)
        stats = args.stat or (["s_t"] if model.name == "dary" else ["buono_bound"])
        config = ExperimentConfig(model, args.t_grid, args.reps, seed, tuple(stats), args.workers)
        records = run_ensemble(config, journal=args.journal)
        _emit(args, records_to_csv(records) if args.format == "csv" else records_to_jsonl(records))
    elif cmd == "fit":
        records = [r for r in read_records(args.infile) if r.statistic == args.stat]
        fit = fit_exponent(records, args.aggregate)
        _emit(args, json.dumps({"statistic": args.stat, "slope": fit.slope,
                                "intercept": fit.intercept, "ci95": list(fit.ci95),
                                "points": fit.points}))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ranlab: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return dispatch(args)
    except (ParameterError, InstanceTooLarge, CapacityError, FileNotFoundError) as exc:
        print(f"ranlab: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except Exception as exc:  # noqa: BLE001
        print(f"ranlab: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
