"""Empirical coupling thresholds, sweeps over n or p, and scaling-law fits."""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics
from .errors import BlowUpError, BracketError, FhnSyncError, InsufficientDataError
from .simulator import SimConfig, run

WORKERS_ENV = "FHNSYNC_WORKERS"


def default_workers() -> int:
    val = os.environ.get(WORKERS_ENV)
    if val:
        return max(1, int(val))
    return os.cpu_count() or 1


@dataclass
class Evaluation:
    g: float
    synchronized: bool
    final_error: float


@dataclass
class ThresholdResult:
    topology: str
    n: int
    g_star: float
    bracket: tuple[float, float]
    evaluations: list[Evaluation]
    p: float | None = None
    method: str = "bisection"
    wall_time: float = 0.0
    error: str | None = None
    late_failures: tuple[float, ...] = ()


@dataclass
class FitResult:
    model: str
    coefficients: tuple[float, ...]
    rmse: float
    r_squared: float

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if self.model == "inverse_n":
            return self.coefficients[0] / x + self.coefficients[1]
        a, b, c = self.coefficients
        return a * x * x + b * x + c


@dataclass
class Evaluator:
    """Runs the base scenario at a given strength; results are cached per g."""

    base: SimConfig
    tol_rel: float = diagnostics.TOL_REL
    window_frac: float = diagnostics.WINDOW_FRAC
    cache: dict = field(default_factory=dict)
    log: list = field(default_factory=list)

    def __call__(self, g: float) -> Evaluation:
        g = float(g)
        if g not in self.cache:
            trace, _ = run(self.base.with_coupling(g))
            ok = diagnostics.is_synchronized(trace, self.tol_rel, self.window_frac)
            self.cache[g] = Evaluation(g, ok, float(trace.e_total[-1]))
        ev = self.cache[g]
        self.log.append(ev)
        return ev

    def many(self, gs, workers: int = 1) -> list[Evaluation]:
        todo = [float(g) for g in gs if float(g) not in self.cache]
        if workers > 1 and len(todo) > 1:
            probe = Evaluator(self.base, self.tol_rel, self.window_frac)
            with ThreadPoolExecutor(workers) as pool:
                for ev in pool.map(probe, todo):
                    self.cache[ev.g] = ev
        return [self(g) for g in gs]


def _grid_points(g_lo, g_hi, resolution):
    k = int(math.ceil((g_hi - g_lo) / resolution - 1e-9))
    pts = [g_lo + i * resolution for i in range(k)] + [g_hi]
    return pts


def scan_threshold(base: SimConfig, g_lo: float, g_hi: float, resolution: float,
                   workers: int = 1, evaluator: Evaluator | None = None, **kw) -> ThresholdResult:
    """Exhaustive scan on ``g_lo + k * resolution``; threshold = smallest passing grid point.

    Failures above the threshold (synchronization need not be monotone in g)
    are listed in ``ThresholdResult.late_failures``.
    """
    t0 = time.perf_counter()
    ev = evaluator or Evaluator(base, **kw)
    pts = _grid_points(g_lo, g_hi, resolution)
    evs = ev.many(pts, workers)
    if evs[0].synchronized or not evs[-1].synchronized:
        raise BracketError(
            f"scan on [{g_lo}, {g_hi}] has no fail-to-pass transition",
            lo_verdict=evs[0].synchronized, hi_verdict=evs[-1].synchronized,
        )
    first = next(i for i, e in enumerate(evs) if e.synchronized)
    return ThresholdResult(
        topology=base.network.topology, n=base.n, g_star=evs[first].g,
        bracket=(evs[first - 1].g, evs[first].g), evaluations=list(evs), method="scan",
        wall_time=time.perf_counter() - t0,
        late_failures=tuple(e.g for e in evs[first:] if not e.synchronized),
    )


def find_threshold(base: SimConfig, g_lo: float, g_hi: float, resolution: float,
                   workers: int = 1, evaluator: Evaluator | None = None, **kw) -> ThresholdResult:
    """Bisection for the smallest synchronizing coupling, bracket width <= ``resolution``.

    The same initial data (config seed) is reused for every evaluation.  A
    confirmation run at ``g_star - resolution`` must fail; if it passes the
    search falls back to :func:`scan_threshold` on ``[g_lo, g_star]`` (points
    above a known pass cannot lower the threshold).
    """
    if not (0 <= g_lo < g_hi and resolution > 0):
        raise ValueError(f"need 0 <= g_lo < g_hi and resolution > 0, got {g_lo}, {g_hi}, {resolution}")
    t0 = time.perf_counter()
    ev = evaluator or Evaluator(base, **kw)
    lo, hi = ev.many([g_lo, g_hi], workers)
    if lo.synchronized or not hi.synchronized:
        raise BracketError(
            f"invalid bracket: g_lo={g_lo} synchronized={lo.synchronized}, "
            f"g_hi={g_hi} synchronized={hi.synchronized}",
            lo_verdict=lo.synchronized, hi_verdict=hi.synchronized,
        )
    a, b = g_lo, g_hi
    while b - a > resolution:
        mid = 0.5 * (a + b)
        if ev(mid).synchronized:
            b = mid
        else:
            a = mid
    result = ThresholdResult(
        topology=base.network.topology, n=base.n, g_star=b, bracket=(a, b),
        evaluations=list(ev.log),
    )
    check = b - resolution
    if check > 0 and check not in (a,) and ev(check).synchronized:
        result = scan_threshold(base, g_lo, b, resolution, workers, evaluator=ev)
        result.evaluations = list(ev.log)
    else:
        result.evaluations = list(ev.log)
    result.wall_time = time.perf_counter() - t0
    return result


def _expand_bracket(ev, g_lo, g_hi, max_doublings):
    for _ in range(max_doublings):
        try:
            if ev(g_hi).synchronized:
                break
        except BlowUpError:
            break
        g_lo, g_hi = g_hi, 2 * g_hi
    return g_lo, g_hi


def _coarse_bracket(ev, g_lo, g_hi, points, max_doublings):
    """Walk a coarse grid upward from ``g_lo``; bracket = (last point, first pass).

    Unlike plain doubling this never skips a synchronizing window below a
    failing upper end.
    """
    prev, lo, hi = g_lo, g_lo, g_hi
    for _ in range(max_doublings + 1):
        step = (hi - lo) / points
        for k in range(1, points + 1):
            g = hi if k == points else lo + k * step
            if ev(g).synchronized:
                return prev, g
            prev = g
        lo, hi = hi, 2 * hi
    return prev, hi


def _threshold_job(base, g_lo, g_hi, resolution, expand, label, coarse=0, **kw):
    t0 = time.perf_counter()
    try:
        ev = Evaluator(base, **kw)
        if coarse:
            g_lo, g_hi = _coarse_bracket(ev, g_lo, g_hi, coarse, expand)
        elif expand:
            g_lo, g_hi = _expand_bracket(ev, g_lo, g_hi, expand)
        res = find_threshold(base, g_lo, g_hi, resolution, evaluator=ev)
    except FhnSyncError as exc:
        res = ThresholdResult(base.network.topology, base.n, math.nan, (g_lo, g_hi), [],
                              error=f"{exc.kind}: {exc}")
    res.wall_time = time.perf_counter() - t0
    if label is not None:
        res.p = label
    return res


def sweep_n(topology: str, n_list, base: SimConfig, g_lo: float, g_hi: float, resolution: float,
            workers: int | None = None, expand: int = 0, coarse: int = 0, **kw) -> list[ThresholdResult]:
    """Independent threshold searches for each n on the shared base scenario.

    Failures are recorded on the result (``error``) and the sweep carries on.
    ``expand`` allows that many doublings of ``g_hi`` when it does not
    synchronize.  With ``coarse > 0`` the bisection bracket is first located
    by walking ``coarse`` equal steps upward from ``g_lo`` (expansions extend
    the walk), which is robust to failures above the threshold.
    """
    n_list = sorted(int(n) for n in n_list)
    if not n_list:
        raise InsufficientDataError("empty node-count list")
    workers = workers or default_workers()
    net = replace(base.network, topology=topology)
    bases = [replace(base, network=replace(net, n=n)) for n in n_list]
    jobs = [(b, g_lo, g_hi, resolution, expand, None, coarse) for b in bases]
    return _run_jobs(jobs, workers, kw)


def sweep_p(p_list, base: SimConfig, g_lo: float, g_hi: float, resolution: float,
            workers: int | None = None, expand: int = 0, coarse: int = 0, **kw) -> list[ThresholdResult]:
    """Threshold versus the percentage of uniformly random nodes (mixture initial data)."""
    p_list = sorted(float(p) for p in p_list)
    if not p_list:
        raise InsufficientDataError("empty percentage list")
    workers = workers or default_workers()
    bases = [replace(base, ic=replace(base.ic, kind="mixture", p_percent=p)) for p in p_list]
    jobs = [(b, g_lo, g_hi, resolution, expand, p, coarse) for b, p in zip(bases, p_list)]
    return _run_jobs(jobs, workers, kw)


def _run_jobs(jobs, workers, kw):
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            futs = [pool.submit(_threshold_job, *j, **kw) for j in jobs]
            return [f.result() for f in futs]
    return [_threshold_job(*j, **kw) for j in jobs]


# ---------------------------------------------------------------------------
# fits


def _fit_stats(y, yhat):
    res = y - yhat
    ss_res = float(res @ res)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    rmse = math.sqrt(ss_res / len(y))
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return rmse, r2


def fit_inverse_n(points) -> FitResult:
    """Least squares ``g = alpha / n + beta`` from the 2x2 normal equations."""
    pts = [(float(n), float(g)) for n, g in points]
    if len(pts) < 2:
        raise InsufficientDataError(f"inverse-n fit needs >= 2 points, got {len(pts)}")
    x = np.array([1.0 / n for n, _ in pts])
    y = np.array([g for _, g in pts])
    m = len(x)
    sx, sy, sxx, sxy = x.sum(), y.sum(), x @ x, x @ y
    det = m * sxx - sx * sx
    if len(set(x.tolist())) < 2 or abs(det) <= 1e-14 * m * sxx:
        raise InsufficientDataError("inverse-n fit needs at least two distinct n")
    alpha = (m * sxy - sx * sy) / det
    beta = (sxx * sy - sx * sxy) / det
    rmse, r2 = _fit_stats(y, alpha * x + beta)
    return FitResult("inverse_n", (float(alpha), float(beta)), rmse, r2)


def fit_quadratic(points) -> FitResult:
    """Least squares ``g = a x^2 + b x + c``."""
    pts = [(float(x), float(g)) for x, g in points]
    xs = np.array([p[0] for p in pts])
    if len(pts) < 3 or len(set(xs.tolist())) < 3:
        raise InsufficientDataError("quadratic fit needs >= 3 points with 3 distinct x")
    y = np.array([p[1] for p in pts])
    X = np.column_stack([xs * xs, xs, np.ones_like(xs)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    rmse, r2 = _fit_stats(y, X @ coef)
    return FitResult("quadratic", tuple(float(c) for c in coef), rmse, r2)


FIT_MODELS = {"inverse_n": fit_inverse_n, "quadratic": fit_quadratic}


# ---------------------------------------------------------------------------
# tables

SWEEP_COLUMNS = ("x", "g_star", "bracket_lo", "bracket_hi", "evaluations", "wall_time", "error")


def _fmt_evals(evs):
    return ";".join(f"{e.g!r}|{int(e.synchronized)}|{e.final_error!r}" for e in evs)


def _parse_evals(text):
    out = []
    for item in filter(None, text.split(";")):
        g, s, err = item.split("|")
        out.append(Evaluation(float(g), bool(int(s)), float(err)))
    return out


def sweep_to_csv(results, path=None, x_name: str | None = None) -> str:
    """Sweep table; the first column is ``n`` or ``p``."""
    if x_name is None:
        x_name = "p" if results and results[0].p is not None else "n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((x_name, "topology") + SWEEP_COLUMNS[1:])
    for r in results:
        x = r.p if x_name == "p" else r.n
        w.writerow([repr(float(x)) if x_name == "p" else x, r.topology, repr(r.g_star),
                    repr(r.bracket[0]), repr(r.bracket[1]), _fmt_evals(r.evaluations),
                    f"{r.wall_time:.3f}", r.error or ""])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def load_sweep(source) -> list[ThresholdResult]:
    text = Path(source).read_text() if "\n" not in str(source) else source
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        x_name = "p" if "p" in row else "n"
        p = float(row["p"]) if x_name == "p" else None
        n = int(row["n"]) if x_name == "n" else 0
        out.append(ThresholdResult(
            topology=row["topology"], n=n, g_star=float(row["g_star"]),
            bracket=(float(row["bracket_lo"]), float(row["bracket_hi"])),
            evaluations=_parse_evals(row["evaluations"]), p=p,
            wall_time=float(row["wall_time"]), error=row["error"] or None,
        ))
    return out


def sweep_points(results) -> list[tuple[float, float]]:
    """``(x, g_star)`` pairs of the successful entries, x = p when present else n."""
    return [((r.p if r.p is not None else r.n), r.g_star) for r in results
            if r.error is None and math.isfinite(r.g_star)]


def median_points(sweeps) -> list[tuple[float, float]]:
    """Pool repeated sweeps (e.g. one per seed): per-x median of the successful thresholds.

    Single-seed thresholds scatter strongly because the finite-time verdict
    depends on the transient; the median is robust to the occasional outlier.
    """
    pooled: dict[float, list[float]] = {}
    for results in sweeps:
        for x, g in sweep_points(results):
            pooled.setdefault(x, []).append(g)
    return [(x, float(np.median(gs))) for x, gs in sorted(pooled.items())]


def fit_to_csv(fit: FitResult, path=None) -> str:
    text = ("model,coefficients,rmse,r_squared\n"
            f"{fit.model},{';'.join(repr(c) for c in fit.coefficients)},{fit.rmse!r},{fit.r_squared!r}\n")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_fit(source) -> FitResult:
    text = Path(source).read_text() if "\n" not in str(source) else source
    row = next(csv.DictReader(io.StringIO(text)))
    return FitResult(row["model"], tuple(float(c) for c in row["coefficients"].split(";")),
                     float(row["rmse"]), float(row["r_squared"]))
