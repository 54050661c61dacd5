"""Freeze reference objective values for five 8x8 Level-2 instances.

Writes tests/fixtures/oracle_8x8.json. Each instance stores the noisy image,
the parameters, the conic (interior-point) optimum and the best value reached
by long-run subgradient descent. Run once; takes several minutes.

    python scripts/generate_oracle_fixtures.py [--iters 1000000]
"""

import argparse
import json
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from oracle import conic_solve, subgradient_solve  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "oracle_8x8.json"


def instances():
    rng = np.random.default_rng(20240607)
    x1, x2 = np.meshgrid(np.arange(8.0), np.arange(8.0), indexing="ij")
    ramp = 20.0 + 15.0 * x1 + 10.0 * x2
    blocky = np.where(x2 < 4, 60.0, 180.0) + 5.0 * x1
    return [
        ("random_weak", rng.uniform(0, 255, (8, 8)), 0.1, 0.1, 0.5, 0.5),
        ("random_medium", rng.uniform(0, 255, (8, 8)), 5.0, 10.0, 0.95, 0.05),
        ("blocky_noisy", blocky + rng.normal(0, 25, (8, 8)), 20.0, 40.0, 1.0, 0.0),
        ("random_strong", rng.uniform(0, 255, (8, 8)), 50.0, 20.0, 0.2, 0.8),
        ("ramp_noisy", ramp + rng.normal(0, 25, (8, 8)), 10.0, 100.0, 0.3, 0.3),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=1_000_000)
    ap.add_argument("--probe-iters", type=int, default=100_000)
    args = ap.parse_args()
    records = []
    for name, u_eta, a0, a1, s, t in instances():
        t0 = time.time()
        conic = conic_solve(u_eta, a0, a1, s, t)
        # pick the subgradient step scale on a short run, then run long
        probes = {st: subgradient_solve(u_eta, a0, a1, s, t, args.probe_iters, st)
                  for st in (0.5, 2.0, 5.0, 20.0, 50.0)}
        step = min(probes, key=probes.get)
        sub = min(min(probes.values()), subgradient_solve(u_eta, a0, a1, s, t, args.iters, step))
        print(f"{name}: conic={conic!r} subgradient={sub!r} "
              f"gap={(sub - conic) / conic:.2e} step={step} ({time.time() - t0:.0f}s)")
        records.append({
            "name": name,
            "u_eta": u_eta.tolist(),
            "alpha0": a0, "alpha1": a1, "s": s, "t": t,
            "objective_conic": conic,
            "objective_subgradient": sub,
            "subgradient_iters": args.iters,
            "subgradient_step0": step,
        })
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"instances": records}, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
