"""Command-line interface.

Structured results go to stdout as ``key=value`` lines; human-readable notes
go to stderr. Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import io
from .core import MIN_ALPHA, Alpha, GridSpec, SkewParams, SolverConfig, TrainingPair
from .diffops import skew_operator
from .errors import PGVError
from .seminorm import pgv2, tv
from .solver import level2_objective, solve_level2
from .training import cost_landscape, dump_result, grid_search, save_landscape_csv


def _unit_interval(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{x} is outside [0, 1]")
    return x


def _alpha(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(x) and x >= MIN_ALPHA):
        raise argparse.ArgumentTypeError(f"alpha must be >= {MIN_ALPHA}, got {x}")
    return x


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return x


def _nonneg_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(x) and x >= 0):
        raise argparse.ArgumentTypeError(f"must be >= 0, got {x}")
    return x


def _seed(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def _value_list(text):
    vals = []
    for part in text.split(","):
        if part.strip():
            vals.append(_unit_interval(part.strip()))
    if not vals:
        raise argparse.ArgumentTypeError("empty value list")
    return vals


def _emit(**pairs):
    for k, v in pairs.items():
        print(f"{k}={v}")


def _solver_flags(p):
    p.add_argument("--max-iters", type=_positive_int, default=SolverConfig.max_iters)
    p.add_argument("--tol", type=_positive_float, default=SolverConfig.tolerance)


def _operator_flags(p):
    p.add_argument("--alpha0", type=_alpha, default=1.0)
    p.add_argument("--alpha1", type=_alpha, default=1.0)
    p.add_argument("--s", type=_unit_interval, default=0.5)
    p.add_argument("--t", type=_unit_interval, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgvdenoise",
        description="PGV^2 denoising with learned (alpha, s, t) via bilevel grid search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="Level-2 reconstruction of one image")
    p.add_argument("--input", required=True, help="noisy image (.pgm or .f64)")
    p.add_argument("--output", required=True, help="reconstruction (.pgm or .f64)")
    _operator_flags(p)
    _solver_flags(p)

    p = sub.add_parser("train", help="Level-1 grid search on a clean/noisy pair")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--grid-config", help="config file with grid.* and solver.* keys")
    p.add_argument("--parallelism", type=_positive_int, default=1)
    p.add_argument("--out-json", required=True)
    p.add_argument("--warm-start", action="store_true",
                   help="reuse solver state between neighbouring (s, t) points")

    p = sub.add_parser("landscape", help="cost over an (s, t) grid at fixed alpha")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--alpha0", type=_alpha, required=True)
    p.add_argument("--alpha1", type=_alpha, required=True)
    p.add_argument("--s-values", type=_value_list, required=True, help="comma list in [0, 1]")
    p.add_argument("--t-values", type=_value_list, required=True, help="comma list in [0, 1]")
    p.add_argument("--output", required=True, help="tab-separated table")
    p.add_argument("--parallelism", type=_positive_int, default=1)
    _solver_flags(p)

    p = sub.add_parser("noise", help="add seeded Gaussian noise")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help=".pgm (clamped) or .f64 (exact)")
    p.add_argument("--sigma", type=_nonneg_float, required=True)
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("seminorm", help="TV and PGV^2 of an image")
    p.add_argument("--input", required=True)
    _operator_flags(p)
    _solver_flags(p)
    return parser


def cmd_denoise(args) -> None:
    img = io.load_image(args.input)
    alpha = Alpha(args.alpha0, args.alpha1)
    coeffs = skew_operator(SkewParams(args.s, args.t))
    cfg = SolverConfig(max_iters=args.max_iters, tolerance=args.tol)
    u, v, diag = solve_level2(img, alpha, coeffs, cfg)
    io.save_image(u, args.output)
    _emit(objective=repr(level2_objective(u.values, img.values, v, alpha, coeffs)),
          iterations=diag.iterations, residual=repr(diag.final_residual),
          converged=str(diag.converged).lower())


def cmd_train(args) -> None:
    if args.grid_config:
        run = io.load_config(args.grid_config)
        grid, cfg = run.grid, run.solver
    else:
        grid, cfg = GridSpec(), SolverConfig()
    pair = TrainingPair(io.load_image(args.clean), io.load_image(args.noisy))
    print(f"searching {grid.size} grid points with {args.parallelism} worker(s)",
          file=sys.stderr)
    result = grid_search(pair, grid, cfg, args.parallelism, warm_start=args.warm_start)
    with open(args.out_json, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_result(result))
    _emit(alpha0=repr(result.alpha.alpha0), alpha1=repr(result.alpha.alpha1),
          s=repr(result.skew.s), t=repr(result.skew.t), cost=repr(result.cost))


def cmd_landscape(args) -> None:
    pair = TrainingPair(io.load_image(args.clean), io.load_image(args.noisy))
    cfg = SolverConfig(max_iters=args.max_iters, tolerance=args.tol)
    land = cost_landscape(pair, Alpha(args.alpha0, args.alpha1), args.s_values,
                          args.t_values, cfg, args.parallelism)
    save_landscape_csv(land, args.output)
    _emit(rows=len(land.s_values), columns=len(land.t_values) + 1,
          min_cost=repr(float(land.costs.min())), max_cost=repr(float(land.costs.max())))


def cmd_noise(args) -> None:
    img = io.load_image(args.input)
    noisy = io.add_gaussian_noise(img, io.NoiseSpec(args.sigma, args.seed))
    io.save_image(noisy, args.output)
    if not args.output.lower().endswith(".f64"):
        print("note: PGM output is clamped to [0, 255] and rounded; use .f64 for exact values",
              file=sys.stderr)
    _emit(sigma=repr(args.sigma), seed=args.seed)


def cmd_seminorm(args) -> None:
    img = io.load_image(args.input)
    alpha = Alpha(args.alpha0, args.alpha1)
    cfg = SolverConfig(max_iters=args.max_iters, tolerance=args.tol)
    value, _ = pgv2(img, alpha, skew_operator(SkewParams(args.s, args.t)), cfg)
    _emit(tv=repr(tv(img)), pgv2=repr(value))


COMMANDS = {
    "denoise": cmd_denoise,
    "train": cmd_train,
    "landscape": cmd_landscape,
    "noise": cmd_noise,
    "seminorm": cmd_seminorm,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (PGVError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
