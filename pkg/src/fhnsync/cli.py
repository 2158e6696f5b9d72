"""Command line: ``fhnsync {simulate,threshold,sweep,alpha,fit,validate}``.

Failures print one line ``error kind=<kind> message=<json string>`` on stderr
and exit with status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, lab, theory
from .config import emit_config, parse_config
from .errors import FhnSyncError
from .network import complete_network, dump_matrix, load_matrix, ring_unidirectional


@dataclass
class RunManifest:
    command: str
    out_dir: str
    config: str = ""
    seed: int | None = None
    files: list[dict] = field(default_factory=list)

    def add(self, path, role):
        self.files.append({"path": str(path), "role": role})

    def write(self):
        import numba

        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        doc = {
            "command": self.command,
            "out_dir": self.out_dir,
            "config": self.config,
            "seed": self.seed,
            "files": self.files,
            "versions": {"fhnsync": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "numba": numba.__version__},
        }
        path = out / "manifest.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return path


def _load_config(args):
    if getattr(args, "config", None):
        path = Path(args.config)
        return parse_config(path.read_text(), base_dir=path.parent)
    return parse_config("")


def _start(args, command, cfg=None, lab_settings=None):
    man = RunManifest(command=command, out_dir=str(args.out))
    Path(args.out).mkdir(parents=True, exist_ok=True)
    if cfg is not None:
        man.config = emit_config(cfg, lab_settings)
        man.seed = cfg.seed
        cpath = Path(args.out) / "config.yaml"
        cpath.write_text(man.config)
        man.add(cpath, "config")
    return man


def cmd_simulate(args):
    from .simulator import run

    cfg, lab_settings = _load_config(args)
    man = _start(args, "simulate", cfg, lab_settings)
    snap_dir = Path(args.out) / "snapshots"
    trace, snaps = run(cfg, out_dir=snap_dir)
    tpath = Path(args.out) / "trace.csv"
    trace.to_csv(tpath, lab_settings.tol_rel, lab_settings.window_frac)
    man.add(tpath, "trace")
    for s in snaps:
        for f in s.files:
            man.add(f, "snapshot")
    man.write()
    verdict = diagnostics.is_synchronized(trace, lab_settings.tol_rel, lab_settings.window_frac) if len(trace) else None
    print(f"samples={len(trace)} synchronized={verdict} out={args.out}")


def _lab_kw(lab_settings):
    return {"tol_rel": lab_settings.tol_rel, "window_frac": lab_settings.window_frac}


def cmd_threshold(args):
    cfg, ls = _load_config(args)
    ls = replace(ls, **{k: v for k, v in (("g_lo", args.g_lo), ("g_hi", args.g_hi),
                                          ("resolution", args.resolution)) if v is not None})
    man = _start(args, "threshold", cfg, ls)
    search = lab.scan_threshold if args.scan else lab.find_threshold
    res = search(cfg, ls.g_lo, ls.g_hi, ls.resolution, workers=args.workers, **_lab_kw(ls))
    path = Path(args.out) / "threshold.csv"
    lab.sweep_to_csv([res], path)
    man.add(path, "threshold")
    man.write()
    print(f"g_star={res.g_star!r} bracket=({res.bracket[0]!r}, {res.bracket[1]!r}) "
          f"evaluations={len(res.evaluations)}")


def cmd_sweep(args):
    cfg, ls = _load_config(args)
    overrides = {k: v for k, v in (("g_lo", args.g_lo), ("g_hi", args.g_hi),
                                   ("resolution", args.resolution), ("n_from", args.n_from),
                                   ("n_to", args.n_to), ("expand", args.expand),
                                   ("coarse", args.coarse)) if v is not None}
    if args.p_list:
        overrides["p_list"] = tuple(float(p) for p in args.p_list.split(","))
    ls = replace(ls, **overrides)
    if args.topology:
        cfg = replace(cfg, network=replace(cfg.network, topology=args.topology))
    man = _start(args, "sweep", cfg, ls)
    if ls.p_list:
        results = lab.sweep_p(ls.p_list, cfg, ls.g_lo, ls.g_hi, ls.resolution,
                              workers=args.workers, expand=ls.expand, coarse=ls.coarse,
                              **_lab_kw(ls))
    else:
        results = lab.sweep_n(cfg.network.topology, range(ls.n_from, ls.n_to + 1), cfg, ls.g_lo,
                              ls.g_hi, ls.resolution, workers=args.workers, expand=ls.expand,
                              coarse=ls.coarse, **_lab_kw(ls))
    path = Path(args.out) / "sweep.csv"
    lab.sweep_to_csv(results, path)
    man.add(path, "sweep")
    man.write()
    for r in results:
        x = r.p if r.p is not None else r.n
        print(f"x={x} g_star={r.g_star!r}" + (f" error={r.error}" if r.error else ""))
    failed = [r for r in results if r.error]
    if failed:
        raise FhnSyncError(f"{len(failed)} of {len(results)} sweep points failed")


def cmd_alpha(args):
    if args.matrix:
        G = load_matrix(Path(args.matrix).read_text())
    elif args.topology == "complete":
        G = complete_network(args.n, args.g)
    elif args.topology == "ring":
        G = ring_unidirectional(args.n, args.g)
    else:
        raise FhnSyncError("alpha needs --topology {complete,ring} with --n, or --matrix")
    a_const = args.a_const
    kappa = None
    if a_const is None:
        a_const, kappa = theory.estimate_constant_a(0.1, 1.0, 0.001, 2.0)
    report = theory.check_sync_condition(G, a_const, args.tie_break, kappa=kappa)
    lines = ["k,l,epsilon_kl,alpha_kl,required_epsilon,margin"]
    lines += [f"{k},{l},{e!r},{a},{r!r},{m!r}" for k, l, e, a, r, m in report.rows()]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        man = RunManifest(command="alpha", out_dir=str(args.out))
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "alpha.csv"
        path.write_text(text)
        mpath = Path(args.out) / "matrix.txt"
        mpath.write_text(dump_matrix(G))
        man.add(path, "alpha")
        man.add(mpath, "matrix")
        man.write()


def cmd_fit(args):
    results = lab.load_sweep(args.input)
    fit = lab.FIT_MODELS[args.model](lab.sweep_points(results))
    text = lab.fit_to_csv(fit)
    sys.stdout.write(text)
    if args.out:
        man = RunManifest(command="fit", out_dir=str(args.out))
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "fit.csv"
        path.write_text(text)
        man.add(path, "fit")
        man.write()


def cmd_validate(args):
    G = load_matrix(Path(args.matrix).read_text())
    print(f"ok n={G.n} edges={len(G.symmetric_edges())}")
    if args.out:
        man = RunManifest(command="validate", out_dir=str(args.out))
        man.write()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fhnsync", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default=None):
        sp.add_argument("--out", default=out_default,
                        help="output directory" + (f" (default {out_default})" if out_default else ""))

    def workers(sp):
        sp.add_argument("--workers", type=int, default=None,
                        help=f"concurrent simulations (default ${lab.WORKERS_ENV} or all cores)")

    sp = sub.add_parser("simulate", help="integrate one network")
    sp.add_argument("--config")
    common(sp, "out/simulate")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("threshold", help="minimal synchronizing coupling")
    sp.add_argument("--config")
    sp.add_argument("--g-lo", type=float)
    sp.add_argument("--g-hi", type=float)
    sp.add_argument("--resolution", type=float)
    sp.add_argument("--scan", action="store_true", help="exhaustive grid instead of bisection")
    common(sp, "out/threshold")
    workers(sp)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("sweep", help="thresholds over n or over the random-IC percentage p")
    sp.add_argument("--config")
    sp.add_argument("--topology", choices=["complete", "ring", "file"])
    sp.add_argument("--n-from", type=int)
    sp.add_argument("--n-to", type=int)
    sp.add_argument("--p-list", help="comma separated percentages")
    sp.add_argument("--g-lo", type=float)
    sp.add_argument("--g-hi", type=float)
    sp.add_argument("--resolution", type=float)
    sp.add_argument("--expand", type=int, help="allowed doublings of g_hi")
    sp.add_argument("--coarse", type=int, help="coarse upward steps that locate the bracket first")
    common(sp, "out/sweep")
    workers(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("alpha", help="path coefficients and the sufficient condition per edge")
    sp.add_argument("--topology", choices=["complete", "ring"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--g", type=float, default=1.0, help="edge weight for built topologies")
    sp.add_argument("--matrix")
    sp.add_argument("--tie-break", choices=list(theory.TIE_BREAKS), default="lexicographic")
    sp.add_argument("--a-const", type=float,
                    help="constant a (default: estimated from the reference FHN parameters)")
    common(sp)
    sp.set_defaults(func=cmd_alpha)

    sp = sub.add_parser("fit", help="least-squares scaling law from a sweep table")
    sp.add_argument("--model", choices=sorted(lab.FIT_MODELS), required=True)
    sp.add_argument("--input", required=True)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("validate", help="check a coupling matrix file")
    sp.add_argument("--matrix", required=True)
    common(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "workers") and args.workers is None:
        args.workers = lab.default_workers()
    try:
        args.func(args)
    except FhnSyncError as exc:
        print(f"error kind={exc.kind} message={json.dumps(str(exc))}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error kind=io message={json.dumps(str(exc))}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
