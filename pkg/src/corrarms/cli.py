"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 a bound check failed, 3 I/O error.
"""

import argparse
import json
import logging
import sys

from . import harness, model
from .checks import SUITES, verify_bounds
from .errors import CorrArmsError

EXIT_OK, EXIT_INVALID, EXIT_SUITE, EXIT_IO = 0, 1, 2, 3


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _instance_spec(args):
    if args.instance:
        return {"path": args.instance}
    if args.family:
        if args.rhos is None or args.h is None:
            raise CorrArmsError("--family lower-bound needs --rhos and --h")
        return {"family": "lower_bound", "rhos": args.rhos, "h": args.h, "prime": args.prime}
    return None


def _cmd_run(args):
    if args.config:
        config = harness.load_config(args.config)
    else:
        if not args.algo:
            raise CorrArmsError("run needs --config or --algo")
        params = {}
        for key in ("n", "m", "delta", "rho0", "rho1", "t", "truth", "base"):
            value = getattr(args, key)
            if value is not None:
                params[key] = value
        config = harness.ExperimentConfig(args.algo, params, _instance_spec(args))
    # command-line flags override the file
    for key, attr in (("trials", "trials"), ("master_seed", "seed"), ("output_path", "out"),
                      ("workers", "workers"), ("max_steps", "max_steps")):
        value = getattr(args, attr)
        if value is not None:
            setattr(config, key, value)
    result = harness.run_experiment(config)
    print(json.dumps(result.summary, indent=1))
    return EXIT_OK


def _cmd_gen_instance(args):
    inst = model.make_lower_bound_instance(args.rhos, args.h)
    if args.prime:
        inst = model.make_prime_instance(inst)
    if args.out:
        model.save_instance(inst, args.out)
    else:
        print(json.dumps(model.instance_to_dict(inst)))
    return EXIT_OK


def _cmd_compare(args):
    rows = harness.compare_estimators(args.rhos, args.ts, args.replications, args.seed, args.out)
    if not args.out:
        print(",".join(harness.COMPARE_FIELDS))
        for row in rows:
            print(",".join(str(row[k]) for k in harness.COMPARE_FIELDS))
    return EXIT_OK


def _cmd_verify(args):
    report = verify_bounds(args.suite, seed=args.seed)
    print(report)
    return EXIT_OK if report.passed else EXIT_SUITE


def _cmd_describe(args):
    inst = model.load_instance(args.instance)
    info = inst.describe()
    print(f"K = {info['dim']}, h = {info['h']}")
    print(f"optimal subset: {info['optimal_subset']}")
    for i, r in enumerate(info["ratios"]):
        print(f"  R[{i}] = {r:.10g}")
    print(f"H_C = {info['complexity']:.10g}")
    print(f"log_bar = {info['log_bar']:.10g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="corrarms", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a seeded Monte Carlo experiment")
    run.add_argument("--config")
    run.add_argument("--instance", help="instance JSON file")
    run.add_argument("--family", choices=["lower-bound"])
    run.add_argument("--rhos", type=_floats)
    run.add_argument("--h", type=int)
    run.add_argument("--prime", action="store_true")
    run.add_argument("--algo", choices=harness.ALGORITHMS)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--workers", type=int)
    run.add_argument("--max-steps", type=int)
    run.add_argument("--n", type=int)
    run.add_argument("--m", type=int)
    run.add_argument("--delta", type=float)
    run.add_argument("--rho0", type=float)
    run.add_argument("--rho1", type=float)
    run.add_argument("--t", type=int)
    run.add_argument("--truth", type=int)
    run.add_argument("--base", choices=harness.ORACLE_BASES)
    run.set_defaults(func=_cmd_run)

    gen = sub.add_parser("gen-instance", help="build a lower-bound family instance")
    gen.add_argument("--family", choices=["lower-bound"], default="lower-bound")
    gen.add_argument("--rhos", type=_floats, required=True)
    gen.add_argument("--h", type=int, required=True)
    gen.add_argument("--prime", action="store_true")
    gen.add_argument("--out")
    gen.set_defaults(func=_cmd_gen_instance)

    cmp_ = sub.add_parser("compare-estimators", help="MSE of both correlation estimators")
    cmp_.add_argument("--rhos", type=_floats, default=[0.0, 0.5, 0.9, 0.99])
    cmp_.add_argument("--ts", type=_ints, default=[10, 100, 1000])
    cmp_.add_argument("--replications", type=int, default=10_000)
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=_cmd_compare)

    ver = sub.add_parser("verify-bounds", help="check one family of bounds numerically")
    ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=_cmd_verify)

    desc = sub.add_parser("describe", help="print S*, the ratios, H_C and log_bar")
    desc.add_argument("--instance", required=True)
    desc.set_defaults(func=_cmd_describe)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CorrArmsError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
