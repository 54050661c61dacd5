"""Cost landscape over (s, t) at a frozen alpha on the synthetic pair.

Writes a tab-separated table and prints it as a coarse text heat map.

    python scripts/landscape.py --alpha0 1 --alpha1 1 --steps 11 --out landscape.tsv
"""

import argparse

import numpy as np

from pgvdenoise.core import Alpha, SolverConfig
from pgvdenoise.synthetic import synthetic_pair
from pgvdenoise.training import cost_landscape, save_landscape_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha0", type=float, default=1.0)
    ap.add_argument("--alpha1", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--parallelism", type=int, default=1)
    ap.add_argument("--out", default="landscape.tsv")
    args = ap.parse_args()

    pair = synthetic_pair(args.size, args.size)
    vals = np.linspace(0, 1, args.steps).round(12).tolist()
    land = cost_landscape(pair, Alpha(args.alpha0, args.alpha1), vals, vals, SolverConfig(),
                          args.parallelism)
    save_landscape_csv(land, args.out)

    shades = " .:-=+*#%@"
    lo, hi = land.costs.min(), land.costs.max()
    print(f"cost range [{lo:.6g}, {hi:.6g}]; rows s = 0..1, columns t = 0..1")
    for s, row in zip(land.s_values, land.costs):
        idx = ((row - lo) / (hi - lo + 1e-300) * (len(shades) - 1)).round().astype(int)
        print(f"{s:5.3f} " + "".join(shades[i] * 2 for i in idx))
    i, j = np.unravel_index(np.argmin(land.costs), land.costs.shape)
    print(f"minimum {lo:.6g} at s={land.s_values[i]}, t={land.t_values[j]}")


if __name__ == "__main__":
    main()
