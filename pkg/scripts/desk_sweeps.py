"""Desk-scale threshold sweeps over n for both topologies, with the scaling-law fits.

    python scripts/desk_sweeps.py --out out/desk_sweeps [--workers 4]

Every threshold is searched once per seed; the fit uses the per-n median.
Writes sweep_<topology>_s<seed>.csv and fit_<topology>.csv plus a manifest.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from fhnsync.cli import RunManifest
from fhnsync.config import desk_config, emit_config
from fhnsync.grid import Grid
from fhnsync.lab import default_workers, fit_inverse_n, fit_quadratic, fit_to_csv, median_points, sweep_n, sweep_to_csv
from fhnsync.simulator import NetworkSpec


@dataclass(frozen=True)
class TopologySweep:
    topology: str
    g_hi: float
    resolution: float
    model: str
    expand: int
    coarse: int = 0


@dataclass(frozen=True)
class DeskSweep:
    n_list: tuple[int, ...] = tuple(range(3, 9))
    seeds: tuple[int, ...] = tuple(range(1, 7))
    side: int = 16
    t_end: float = 150.0
    record_every: int = 100
    runs: tuple[TopologySweep, ...] = field(default_factory=lambda: (
        TopologySweep("complete", 0.06, 1e-3, "inverse_n", 1),
        TopologySweep("ring", 0.4, 5e-3, "quadratic", 2, coarse=8),
    ))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/desk_sweeps")
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args(argv)
    plan = DeskSweep()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("desk_sweeps", str(out), seed=plan.seeds[0])
    grid = Grid(plan.side, plan.side, float(plan.side), float(plan.side))
    for job in plan.runs:
        sweeps = []
        for seed in plan.seeds:
            base = desk_config(grid=grid, t_end=plan.t_end, record_every=plan.record_every,
                               network=NetworkSpec(job.topology, 3, 0.02), seed=seed)
            if seed == plan.seeds[0]:
                man.config += f"# {job.topology}, seeds {list(plan.seeds)}\n" + emit_config(base)
            results = sweep_n(job.topology, plan.n_list, base, 0.0, job.g_hi, job.resolution,
                              workers=args.workers, expand=job.expand, coarse=job.coarse)
            path = out / f"sweep_{job.topology}_s{seed}.csv"
            sweep_to_csv(results, path)
            man.add(path, "sweep")
            sweeps.append(results)
            print(f"{job.topology} seed={seed} g_star=" + " ".join(
                f"{r.g_star:.5f}" if r.error is None else "nan" for r in results), flush=True)
        fit = (fit_inverse_n if job.model == "inverse_n" else fit_quadratic)(median_points(sweeps))
        fpath = out / f"fit_{job.topology}.csv"
        fit_to_csv(fit, fpath)
        man.add(fpath, "fit")
        print(f"{job.topology} {fit.model} coefficients={fit.coefficients} r2={fit.r_squared:.4f}")
    man.write()


if __name__ == "__main__":
    main()
