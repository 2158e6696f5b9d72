"""Synchronization errors, the pairwise Lyapunov sum and energy monitors."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTraceError
from .grid import Grid, h1_sq_array, integral_array

TOL_REL = 1e-3
WINDOW_FRAC = 0.1
ENERGY_KEYS = ("l2_u", "l2_v", "h1_u", "max_abs_u", "l4_u")


def pair_sq_norms(u: np.ndarray, v: np.ndarray, grid: Grid):
    """Matrices ``|u_i - u_j|_2^2`` and ``|v_i - v_j|_2^2`` for stacked node arrays."""
    n = len(u)
    W = np.zeros((n, n))
    Z = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            du = u[i] - u[j]
            dv = v[i] - v[j]
            W[i, j] = W[j, i] = float(integral_array(du * du, grid))
            Z[i, j] = Z[j, i] = float(integral_array(dv * dv, grid))
    return W, Z


def _arrays(state):
    u, v = state.arrays()
    return u, v, state.grid


def sync_error(state):
    """``(e_total, e_pairs)`` with full-state norms ``sqrt(|du|^2 + |dv|^2)``.

    ``e_total`` sums the consecutive pairs ``(i, i+1)``; ``e_pairs`` is the
    symmetric n x n matrix over all pairs.
    """
    u, v, grid = _arrays(state)
    W, Z = pair_sq_norms(u, v, grid)
    e_pairs = np.sqrt(W + Z)
    e_total = float(sum(e_pairs[i, i + 1] for i in range(len(u) - 1)))
    return e_total, e_pairs


def lyapunov_v(state) -> float:
    """Double sum over ordered pairs of ``|u_j - u_i|^2 + |v_j - v_i|^2``."""
    u, v, grid = _arrays(state)
    W, Z = pair_sq_norms(u, v, grid)
    return float((W + Z).sum())


def energy_monitors(u: np.ndarray, v: np.ndarray, grid: Grid) -> dict[str, float]:
    """Node-wise maxima of the bounded quantities (squared L2, H1 seminorm, sup, L4^4)."""
    return {
        "l2_u": float(np.max(integral_array(u * u, grid))),
        "l2_v": float(np.max(integral_array(v * v, grid))),
        "h1_u": float(np.max(h1_sq_array(u, grid))),
        "max_abs_u": float(np.max(np.abs(u))),
        "l4_u": float(np.max(integral_array(u**4, grid))),
    }


@dataclass
class SyncTrace:
    n: int
    times: np.ndarray
    e_total: np.ndarray
    e_consecutive: np.ndarray  # (samples, n-1), full state
    eu_consecutive: np.ndarray  # (samples, n-1), u only
    V: np.ndarray
    energies: dict[str, np.ndarray]
    scale: np.ndarray  # mean node norm |U_i|_2
    e_pairs: np.ndarray | None = None  # (samples, n, n); not stored in CSV

    def __len__(self):
        return len(self.times)

    def columns(self) -> list[str]:
        pairs = [f"{i + 1}_{i + 2}" for i in range(self.n - 1)]
        return (["t", "e_total"] + [f"e_{p}" for p in pairs] + [f"eu_{p}" for p in pairs]
                + ["V"] + list(ENERGY_KEYS) + ["scale"])

    def table(self) -> np.ndarray:
        cols = [self.times, self.e_total]
        cols += [self.e_consecutive[:, k] for k in range(self.n - 1)]
        cols += [self.eu_consecutive[:, k] for k in range(self.n - 1)]
        cols += [self.V] + [self.energies[k] for k in ENERGY_KEYS] + [self.scale]
        return np.column_stack(cols) if len(self) else np.zeros((0, len(cols)))

    def to_csv(self, path=None, tol_rel=TOL_REL, window_frac=WINDOW_FRAC) -> str:
        """CSV text (also written to ``path``) with a verdict footer comment when nonempty."""
        buf = io.StringIO()
        buf.write(",".join(self.columns()) + "\n")
        for row in self.table():
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        if len(self):
            verdict = is_synchronized(self, tol_rel, window_frac)
            cross = first_crossing(self, tol_rel)
            cross_txt = "none" if cross is None else repr(cross)
            buf.write(
                f"# synchronized={str(verdict).lower()} first_crossing={cross_txt} "
                f"tol_rel={tol_rel!r} window_frac={window_frac!r}\n"
            )
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "SyncTrace":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        header = lines[0].split(",")
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))
        col = {name: data[:, k] for k, name in enumerate(header)}
        n = sum(1 for h in header if h.startswith("e_") and h != "e_total") + 1
        pairs = [f"{i + 1}_{i + 2}" for i in range(n - 1)]
        return cls(
            n=n,
            times=col["t"],
            e_total=col["e_total"],
            e_consecutive=np.column_stack([col[f"e_{p}"] for p in pairs]) if pairs else np.zeros((len(data), 0)),
            eu_consecutive=np.column_stack([col[f"eu_{p}"] for p in pairs]) if pairs else np.zeros((len(data), 0)),
            V=col["V"],
            energies={k: col[k] for k in ENERGY_KEYS},
            scale=col["scale"],
        )


@dataclass
class TraceRecorder:
    """Accumulates samples from raw ``(n, ny, nx)`` arrays during a run."""

    grid: Grid
    n: int
    keep_pairs: bool = True
    _rows: list = field(default_factory=list)

    def record(self, t: float, u: np.ndarray, v: np.ndarray):
        W, Z = pair_sq_norms(u, v, self.grid)
        Wu = np.sqrt(W)
        E = np.sqrt(W + Z)
        cons = np.array([E[i, i + 1] for i in range(self.n - 1)])
        cons_u = np.array([Wu[i, i + 1] for i in range(self.n - 1)])
        node_norm = np.sqrt(integral_array(u * u, self.grid) + integral_array(v * v, self.grid))
        self._rows.append(
            (t, float(cons.sum()), cons, cons_u, float((W + Z).sum()),
             energy_monitors(u, v, self.grid), float(node_norm.mean()), E if self.keep_pairs else None)
        )

    def finish(self) -> SyncTrace:
        r = self._rows
        m = self.n - 1
        return SyncTrace(
            n=self.n,
            times=np.array([x[0] for x in r], dtype=float),
            e_total=np.array([x[1] for x in r], dtype=float),
            e_consecutive=np.array([x[2] for x in r], dtype=float).reshape(len(r), m),
            eu_consecutive=np.array([x[3] for x in r], dtype=float).reshape(len(r), m),
            V=np.array([x[4] for x in r], dtype=float),
            energies={k: np.array([x[5][k] for x in r], dtype=float) for k in ENERGY_KEYS},
            scale=np.array([x[6] for x in r], dtype=float),
            e_pairs=np.array([x[7] for x in r]) if r and self.keep_pairs else None,
        )


def _threshold(trace: SyncTrace, tol_rel: float) -> np.ndarray:
    return tol_rel * np.maximum(1.0, trace.scale)


def is_synchronized(trace: SyncTrace, tol_rel: float = TOL_REL, window_frac: float = WINDOW_FRAC) -> bool:
    """True iff ``e_total <= tol_rel * max(1, scale)`` on the final ``window_frac`` of the run.

    ``scale`` is the mean node norm ``|U_i|_2`` at the same sample; the run
    is taken to start at t = 0.
    """
    if len(trace) == 0:
        raise EmptyTraceError("cannot judge synchronization on an empty trace")
    if not 0 < window_frac <= 1:
        raise ValueError(f"window_frac must lie in (0, 1], got {window_frac}")
    t_last = trace.times[-1]
    window = trace.times >= (1.0 - window_frac) * t_last
    ok = trace.e_total <= _threshold(trace, tol_rel)
    return bool(ok[window].all())


def first_crossing(trace: SyncTrace, tol_rel: float = TOL_REL) -> float | None:
    """Earliest sample time from which the error stays under tolerance to the end."""
    if len(trace) == 0:
        return None
    ok = trace.e_total <= _threshold(trace, tol_rel)
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    start = 0 if len(bad) == 0 else bad[-1] + 1
    return float(trace.times[start])
