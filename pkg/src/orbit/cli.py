"""Command line entry point: ``orbit <command> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data or validation
errors.  Output files are written atomically.
"""

import argparse
import os
import sys

import numpy as np

from . import formats
from .analysis import (BoundQuery, accuracy_report, bound_joint, bound_within_k,
                       mc_boundary_experiment, summarize_bounds)
from .core import ordering_from_elevation
from .exceptions import OrbitError
from .orbcor import correct_stack, err_profiles, learn_ordering
from .scale import FusionConfig, build_mapping_grid, fuse
from .synth import (aggregate_to_lsr, desk_levels, gen_bathymetry, inject_noise, render_stack,
                    simulate_level_series)
from .temporal import alpha_sweep, smooth_stack, suggest_alpha


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _pair(text):
    try:
        r, c = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL, got {text!r}")
    return r, c


def _int_list(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_alpha_range(text):
    """``start:step:stop`` with ``stop`` included (up to rounding)."""
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:step:stop, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("ORBIT_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _emit_csv(table, path):
    text = formats.export_csv(table, path)
    if text is not None:
        sys.stdout.write(text)


def cmd_learn_order(args):
    stack = formats.read_stack(args.stack)
    formats.write_ordering(args.output, learn_ordering(stack, args.max_iters))


def cmd_import_dem(args):
    formats.write_ordering(args.output, ordering_from_elevation(formats.read_elevation(args.dem)))


def cmd_correct(args):
    stack = formats.read_stack(args.stack)
    ordering = formats.read_ordering(args.ordering)
    if args.alpha is None:
        _, corrected = correct_stack(stack, ordering)
    else:
        _, corrected, _ = smooth_stack(stack, ordering, args.alpha)
    formats.write_stack(args.output, corrected)


def cmd_fuse(args):
    coarse = formats.read_stack(args.coarse)
    ordering = formats.read_ordering(args.ordering) if args.ordering else None
    training = formats.read_stack(args.training) if args.training else None
    config = FusionConfig(wth=None if args.auto_wth else args.wth, alpha=args.alpha,
                          unknown_policy=args.unknown_policy.replace("-", "_"))
    result = fuse(coarse, ordering, hsr_stack=training, factor=args.factor, offset=args.offset,
                  config=config, max_refine_iters=args.max_iters)
    formats.write_stack(args.output, result.labels)
    print(f"wth={result.wth}", file=sys.stderr)


def cmd_simulate(args):
    elevation = gen_bathymetry(args.kind, args.rows, args.cols, seed=args.seed)
    # round through float32 so the ordering matches a re-import of the ORBE file
    elevation = elevation.astype(np.float32)
    ordering = ordering_from_elevation(elevation)
    n = ordering.size
    if args.pattern == "desk":
        levels = desk_levels(args.timesteps, n)
    elif args.pattern == "sinusoid":
        levels = simulate_level_series(args.timesteps, n, "sinusoid", seed=args.seed)
    else:
        levels = simulate_level_series(args.timesteps, n, "random_walk", seed=args.seed,
                                       step_scale=args.step_scale)
    formats.write_stack(args.output, render_stack(ordering, levels))
    if args.ordering_out:
        formats.write_ordering(args.ordering_out, ordering)
    if args.elevation_out:
        formats.write_elevation(args.elevation_out, elevation)


def cmd_perturb(args):
    stack = formats.read_stack(args.stack)
    noisy = inject_noise(stack, args.fraction, blob_mean_size=args.blob_size,
                         run_mean_length=args.run_length, missing_share=args.missing_share,
                         seed=args.seed)
    formats.write_stack(args.output, noisy)


def cmd_aggregate(args):
    fine = formats.read_stack(args.stack)
    grid = build_mapping_grid(fine.shape[1], fine.shape[2], args.factor, args.offset)
    formats.write_stack(args.output, aggregate_to_lsr(fine, grid, args.wth))


def cmd_eval(args):
    report = accuracy_report(formats.read_stack(args.estimate), formats.read_stack(args.truth))
    _emit_csv(report, args.output)


def cmd_alpha_sweep(args):
    stack = formats.read_stack(args.stack)
    ordering = formats.read_ordering(args.ordering)
    sweep = alpha_sweep(err_profiles(stack, ordering), args.alphas)
    _emit_csv(sweep, args.output)
    if len(sweep) >= 3:
        print(f"suggested_alpha={suggest_alpha(sweep)!r}", file=sys.stderr)


def cmd_bound(args):
    q = BoundQuery(args.gr, args.C, args.k)
    print(f"within_k={bound_within_k(q)!r}")
    print(f"joint={bound_joint(q)!r}")


def cmd_mc_bound(args):
    table = mc_boundary_experiment(kind=args.kind, rows=args.rows, cols=args.cols,
                                   factors=args.factors, wth_fractions=args.wth_fractions,
                                   trials=args.trials, seed=args.seed, n_jobs=_threads(args))
    if args.output:
        formats.export_csv(table, args.output)
    summary = summarize_bounds(table, ks=args.ks)
    _emit_csv(summary, args.summary)


def build_parser():
    parser = _Parser(prog="orbit", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: $ORBIT_THREADS or CPU count)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("learn-order", help="learn a depth ordering from a label stack")
    p.add_argument("stack")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--max-iters", type=int, default=50)
    p.set_defaults(func=cmd_learn_order)

    p = sub.add_parser("import-dem", help="convert an ORBE elevation grid to an ordering")
    p.add_argument("dem")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_import_dem)

    p = sub.add_parser("correct", help="physically consistent correction of a stack")
    p.add_argument("stack")
    p.add_argument("ordering")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--alpha", type=float, default=None,
                   help="temporal weight; enables level smoothing")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("fuse", help="transfer a coarse stack to the fine resolution")
    p.add_argument("coarse")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ordering", help="fine ORBO ordering")
    src.add_argument("--training", help="fine ORBL stack to learn the ordering from")
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--offset", type=_pair, default=(0, 0), help="ROW,COL lattice origin")
    thr = p.add_mutually_exclusive_group(required=True)
    thr.add_argument("--wth", type=int)
    thr.add_argument("--auto-wth", action="store_true")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--unknown-policy", choices=("keep", "fill-land", "fill-mid"), default="keep")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("simulate", help="synthetic lake: fine truth stack and ordering")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=("gaussian_mix", "bowl"), default="gaussian_mix")
    p.add_argument("--rows", type=int, default=120)
    p.add_argument("--cols", type=int, default=120)
    p.add_argument("--timesteps", type=int, default=200)
    p.add_argument("--pattern", choices=("desk", "sinusoid", "random_walk"), default="desk")
    p.add_argument("--step-scale", type=float, default=20.0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--ordering-out")
    p.add_argument("--elevation-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("perturb", help="inject correlated errors and gaps")
    p.add_argument("stack")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--blob-size", type=float, default=8.0)
    p.add_argument("--run-length", type=float, default=2.0)
    p.add_argument("--missing-share", type=float, default=0.3)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("aggregate", help="threshold a fine stack onto a coarse lattice")
    p.add_argument("stack")
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--offset", type=_pair, default=(0, 0))
    p.add_argument("--wth", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("eval", help="accuracy of an estimate against truth (CSV)")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("alpha-sweep", help="mismatch/transition costs over an alpha grid")
    p.add_argument("stack")
    p.add_argument("ordering")
    p.add_argument("--alphas", type=parse_alpha_range, required=True, help="start:step:stop")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_alpha_sweep)

    p = sub.add_parser("bound", help="boundary containment probabilities")
    p.add_argument("--gr", type=int, required=True)
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("mc-bound", help="Monte Carlo check of the containment bound")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--kind", choices=("bowl", "gaussian_mix"), default="bowl")
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--cols", type=int, default=200)
    p.add_argument("--factors", type=_int_list, default=[10, 20])
    p.add_argument("--wth-fractions", type=_float_list, default=[0.5, 0.75])
    p.add_argument("--ks", type=_int_list, default=[0, 1, 2])
    p.add_argument("-o", "--output", help="per-trial CSV")
    p.add_argument("--summary", default=None, help="summary CSV (default stdout)")
    p.set_defaults(func=cmd_mc_bound)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:
        # --help exits 0 through argparse
        return 0 if exc.code in (0, None) else 1
    try:
        args.func(args)
    except (OrbitError, OSError, ValueError) as exc:
        print(f"orbit {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
