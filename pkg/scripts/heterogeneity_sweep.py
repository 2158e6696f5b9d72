"""Threshold versus the percentage p of nodes started from uniform random data.

Desk version of the mixed-initial-data experiment: complete network, n = 8,
32 x 32 grid, T = 300, quadratic fit in p.

    python scripts/heterogeneity_sweep.py --out out/heterogeneity
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from fhnsync.cli import RunManifest
from fhnsync.config import desk_config, emit_config
from fhnsync.lab import default_workers, fit_quadratic, fit_to_csv, sweep_p, sweep_points, sweep_to_csv
from fhnsync.simulator import InitialCondition, NetworkSpec


@dataclass(frozen=True)
class HeterogeneitySweep:
    n: int = 8
    p_list: tuple[float, ...] = (0.0, 25.0, 50.0, 75.0, 100.0)
    g_hi: float = 0.05
    resolution: float = 5e-4
    seed: int = 1
    expand: int = 3


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/heterogeneity")
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args(argv)
    plan = HeterogeneitySweep()
    base = desk_config(network=NetworkSpec("complete", plan.n, 0.02),
                       ic=InitialCondition("mixture"), seed=plan.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("heterogeneity_sweep", str(out), config=emit_config(base), seed=plan.seed)
    results = sweep_p(plan.p_list, base, 0.0, plan.g_hi, plan.resolution,
                      workers=args.workers, expand=plan.expand)
    sweep_to_csv(results, out / "sweep_p.csv")
    man.add(out / "sweep_p.csv", "sweep")
    pts = sweep_points(results)
    for p, g in pts:
        print(f"p={p:g} g_star={g:.6f}")
    if len(pts) >= 3:
        fit = fit_quadratic(pts)
        fit_to_csv(fit, out / "fit_p.csv")
        man.add(out / "fit_p.csv", "fit")
        print(f"quadratic coefficients={fit.coefficients} r2={fit.r_squared:.4f}")
    man.write()


if __name__ == "__main__":
    main()
