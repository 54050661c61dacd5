"""Level-1 of the bilevel scheme: exhaustive search over (alpha0, alpha1, s, t).

The cost of a parameter tuple is the (unsquared) L2 distance between the
Level-2 reconstruction and the clean image; its argmin coincides with that of
the squared distance.

Work is split into units fixed by the grid alone (one unit per
(alpha0, alpha1) pair, covering all (s, t) in snake order), so results are
bit-identical for any worker count, with or without warm starts.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    Alpha, Evaluation, GridSpec, ScalarImage, SkewParams, SolverConfig, TrainingPair,
    TrainingResult,
)
from .diffops import skew_operator
from .errors import DimensionMismatch, EvaluationError, NonFiniteError, PGVError
from .solver import solve_level2


def evaluate_cost(pair: TrainingPair, alpha: Alpha, skew: SkewParams,
                  cfg: SolverConfig | None = None, *, init=None, return_state=False):
    """Denoise ``pair.noisy`` with B_{s,t} and measure ``||u - u_c||_2``.

    Returns ``(cost, u, diagnostics)`` (plus the solver state with
    ``return_state``).
    """
    res = solve_level2(pair.noisy, alpha, skew_operator(skew), cfg, init=init,
                       return_state=return_state)
    u = res[0]
    r = u.values - pair.clean.values
    cost = math.sqrt(float(np.sum(r * r)))
    return (cost, u) + tuple(res[2:])


# ---------------------------------------------------------------------------
# worker plumbing

_WORKER = {}


def _init_worker(clean, noisy, cfg, warm_start):
    _WORKER["pair"] = TrainingPair(ScalarImage(clean), ScalarImage(noisy))
    _WORKER["cfg"] = cfg
    _WORKER["warm"] = warm_start


def _run_unit(unit):
    """Evaluate one alpha pair over its list of (s, t); return costs and the best u."""
    a0, a1, points = unit
    pair, cfg, warm = _WORKER["pair"], _WORKER["cfg"], _WORKER["warm"]
    alpha = Alpha(a0, a1)
    rows = []
    best = None
    state = None
    for s, t in points:
        try:
            cost, u, diag, state = evaluate_cost(
                pair, alpha, SkewParams(s, t), cfg, init=state if warm else None,
                return_state=True)
        except PGVError as exc:
            raise EvaluationError(
                f"evaluation failed at alpha0={a0!r}, alpha1={a1!r}, s={s!r}, t={t!r}: {exc}"
            ) from exc
        rows.append((cost, diag.iterations))
        if best is None or (cost, s, t) < best[:3]:
            best = (cost, s, t, u.values)
    return rows, best


def _snake(s_values, t_values):
    """All (s, t) pairs, t ascending on even s rows and descending on odd ones."""
    return tuple(
        (s, t)
        for i, s in enumerate(s_values)
        for t in (t_values if i % 2 == 0 else t_values[::-1])
    )


def _units(grid: GridSpec):
    points = _snake(grid.s_values, grid.t_values)
    return [(a0, a1, points) for a0 in grid.alpha0_values for a1 in grid.alpha1_values]


def _map_units(pair, units, cfg, parallelism, warm_start):
    args = (pair.clean.values, pair.noisy.values, cfg, warm_start)
    if parallelism <= 1 or len(units) <= 1:
        _init_worker(*args)
        return [_run_unit(u) for u in units]
    workers = min(parallelism, len(units))
    # static partition: contiguous blocks of units per worker
    chunk = math.ceil(len(units) / workers)
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=args) as pool:
        return list(pool.map(_run_unit, units, chunksize=chunk))


def grid_search(pair: TrainingPair, grid: GridSpec | None = None,
                cfg: SolverConfig | None = None, parallelism: int = 1,
                warm_start: bool = False) -> TrainingResult:
    """Evaluate every grid tuple and return the minimizer.

    Ties go to the lexicographically smallest (alpha0, alpha1, s, t).
    ``warm_start`` reuses the solver state between consecutive (s, t) points
    of the same alpha pair.
    """
    grid = grid or GridSpec()
    cfg = cfg or SolverConfig()
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    units = _units(grid)
    results = _map_units(pair, units, cfg, parallelism, warm_start)

    evaluations = []
    best = None
    for (a0, a1, points), (rows, unit_best) in zip(units, results):
        alpha = Alpha(a0, a1)
        evaluations.extend(
            Evaluation(alpha, SkewParams(s, t), cost, iters)
            for (s, t), (cost, iters) in sorted(zip(points, rows))
        )
        # units arrive in lexicographic alpha order; strict < keeps the first minimizer
        if best is None or unit_best[0] < best[0]:
            best = (unit_best[0], alpha, SkewParams(unit_best[1], unit_best[2]), unit_best[3])
    cost, alpha, skew, u = best
    return TrainingResult(alpha, skew, cost, ScalarImage(u), tuple(evaluations))


def slice_minimum(result: TrainingResult, s: float = 0.5, t: float = 0.5) -> float:
    """Smallest evaluated cost with the operator fixed at (s, t)."""
    costs = [e.cost for e in result.evaluations if e.skew.s == s and e.skew.t == t]
    if not costs:
        raise ValueError(f"no evaluations at s={s}, t={t}")
    return min(costs)


# ---------------------------------------------------------------------------
# cost landscape


@dataclass(frozen=True, eq=False)
class CostLandscape:
    s_values: tuple
    t_values: tuple
    costs: np.ndarray
    alpha: Alpha

    def __post_init__(self):
        costs = np.array(self.costs, dtype=np.float64)
        if costs.shape != (len(self.s_values), len(self.t_values)):
            raise DimensionMismatch(
                f"costs shape {costs.shape} does not match "
                f"{len(self.s_values)}x{len(self.t_values)} value lists"
            )
        if np.any(np.isnan(costs)):
            raise NonFiniteError("landscape contains NaN")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)


def cost_landscape(pair: TrainingPair, alpha: Alpha, s_values, t_values,
                   cfg: SolverConfig | None = None, parallelism: int = 1) -> CostLandscape:
    """Cost over the (s, t) grid at frozen alpha; rows follow ``s_values`` order."""
    cfg = cfg or SolverConfig()
    if not isinstance(alpha, Alpha):
        alpha = Alpha(*alpha)
    s_values = tuple(SkewParams(s, 0.0).s for s in s_values)
    t_values = tuple(SkewParams(0.0, t).t for t in t_values)
    if not s_values or not t_values:
        raise ValueError("s_values and t_values must be non-empty")
    units = [(alpha.alpha0, alpha.alpha1, tuple((s, t) for t in t_values)) for s in s_values]
    results = _map_units(pair, units, cfg, parallelism, False)
    costs = np.array([[c for c, _ in rows] for rows, _ in results])
    return CostLandscape(s_values, t_values, costs, alpha)


def format_landscape(land: CostLandscape) -> str:
    """Tab-separated table: header ``s`` then the t values, one row per s value.

    Numbers use 9 significant digits; lines end with LF.
    """
    lines = ["\t".join(["s"] + [f"{t:.9g}" for t in land.t_values])]
    for s, row in zip(land.s_values, land.costs):
        lines.append("\t".join([f"{s:.9g}"] + [f"{c:.9g}" for c in row]))
    return "\n".join(lines) + "\n"


def save_landscape_csv(land: CostLandscape, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_landscape(land))


def parse_landscape(text: str, alpha: Alpha) -> CostLandscape:
    rows = [line.split("\t") for line in text.splitlines() if line]
    header = rows[0]
    if header[0] != "s":
        raise ValueError("landscape header must start with 's'")
    t_values = tuple(float(x) for x in header[1:])
    s_values = tuple(float(r[0]) for r in rows[1:])
    costs = [[float(x) for x in r[1:]] for r in rows[1:]]
    return CostLandscape(s_values, t_values, np.array(costs), alpha)


# ---------------------------------------------------------------------------
# result serialization


def result_to_dict(result: TrainingResult) -> dict:
    """JSON-ready view of a training result (the reconstruction is omitted)."""
    return {
        "schema": "pgvdenoise.training_result/1",
        "optimum": {
            "alpha0": result.alpha.alpha0,
            "alpha1": result.alpha.alpha1,
            "s": result.skew.s,
            "t": result.skew.t,
        },
        "cost": result.cost,
        "evaluations": {
            "columns": ["alpha0", "alpha1", "s", "t", "cost", "iterations"],
            "rows": [
                [e.alpha.alpha0, e.alpha.alpha1, e.skew.s, e.skew.t, e.cost, e.iterations]
                for e in result.evaluations
            ],
        },
    }


def dump_result(result: TrainingResult) -> str:
    return json.dumps(result_to_dict(result), indent=1) + "\n"


__all__ = [
    "CostLandscape", "cost_landscape", "dump_result", "evaluate_cost",
    "format_landscape", "grid_search", "parse_landscape", "result_to_dict",
    "save_landscape_csv", "slice_minimum",
]
