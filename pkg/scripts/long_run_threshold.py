"""Full-scale threshold for the three-node complete network (multi-hour).

100 x 100 grid on the 100 x 100 domain, T = 3000, uniform random initial
data.  The expected answer lies in [0.007, 0.03].

    FHNSYNC_WORKERS=8 python scripts/long_run_threshold.py --out out/long_run

The same check runs under pytest with FHNSYNC_LONG=1.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from fhnsync.cli import RunManifest
from fhnsync.config import emit_config
from fhnsync.lab import default_workers, find_threshold, sweep_to_csv
from fhnsync.simulator import InitialCondition, NetworkSpec, SimConfig


@dataclass(frozen=True)
class LongRun:
    g_lo: float = 0.0
    g_hi: float = 0.05
    resolution: float = 1e-3
    seed: int = 1
    record_every: int = 1000


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/long_run")
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args(argv)
    plan = LongRun()
    base = SimConfig(network=NetworkSpec("complete", 3, 0.02), ic=InitialCondition("uniform_random"),
                     seed=plan.seed, record_every=plan.record_every)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("long_run_threshold", str(out), config=emit_config(base), seed=plan.seed)
    res = find_threshold(base, plan.g_lo, plan.g_hi, plan.resolution, workers=args.workers)
    sweep_to_csv([res], out / "threshold.csv")
    man.add(out / "threshold.csv", "threshold")
    man.write()
    inside = 0.007 <= res.g_star <= 0.03
    print(f"g_star={res.g_star!r} bracket={res.bracket} within [0.007, 0.03]: {inside}")


if __name__ == "__main__":
    main()
