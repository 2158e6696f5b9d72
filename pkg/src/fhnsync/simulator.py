"""Time integration of the coupled FHN network.

The production path (:func:`run`) advances all nodes with the fused kernel in
:mod:`fhnsync.kernels`; :func:`step_euler` is the plain numpy reference built
from :mod:`fhnsync.fhn` and is used to cross-check the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics
from .errors import BlowUpError, InvalidSizeError, StabilityError
from .fhn import FhnParams, ForcingProfile, coupling_arrays, evaluate_forcing, reaction_arrays
from .grid import Field, Grid, write_csv, write_pgm
from .kernels import euler_steps
from .network import CouplingMatrix, complete_network, ring_unidirectional

IC_KINDS = ("homogeneous", "uniform_random", "spiral_seed", "mixture")
TOPOLOGIES = ("complete", "ring", "file")


@dataclass
class NetworkState:
    nodes: list[tuple[Field, Field]]
    t: float = 0.0

    def __post_init__(self):
        if not self.nodes:
            raise InvalidSizeError("a network state needs at least one node")
        grid = self.nodes[0][0].grid
        for u, v in self.nodes:
            if u.grid != grid or v.grid != grid:
                raise InvalidSizeError("all node fields must share one grid")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def grid(self) -> Grid:
        return self.nodes[0][0].grid

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Copies of the stacked ``(n, ny, nx)`` u and v arrays."""
        u = np.stack([uv[0].values for uv in self.nodes])
        v = np.stack([uv[1].values for uv in self.nodes])
        return u, v

    @classmethod
    def from_arrays(cls, grid: Grid, u: np.ndarray, v: np.ndarray, t: float = 0.0):
        return cls([(Field(grid, u[i].copy()), Field(grid, v[i].copy())) for i in range(len(u))], t)

    def is_finite(self) -> bool:
        return all(u.is_finite() and v.is_finite() for u, v in self.nodes)


@dataclass(frozen=True)
class InitialCondition:
    """Initial data for every node.

    ``homogeneous``: node i gets the constants ``u0[i], v0[i]`` (scalars are broadcast).
    ``uniform_random``: independent uniforms on ``[lo, hi]`` per cell for u and v.
    ``spiral_seed``: crossed half-planes u = +-1.8, v = +-0.9; node i uses the
    pattern reflected in x when ``i`` is odd and in y when ``i % 4 >= 2`` so
    that seeded nodes differ.
    ``mixture``: the first ``floor(p n / 100 + 1/2)`` nodes are uniform random,
    the rest homogeneous with ``u = -1 + 2 (i + 1/2) / n``, ``v = 0``.
    """

    kind: str = "uniform_random"
    u0: float | tuple[float, ...] = 0.0
    v0: float | tuple[float, ...] = 0.0
    lo: float = -1.0
    hi: float = 1.0
    p_percent: float = 50.0

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if not 0 <= self.p_percent <= 100:
            raise ValueError(f"mixture percentage must lie in [0, 100], got {self.p_percent}")
        if not self.lo <= self.hi:
            raise ValueError(f"uniform range is empty: [{self.lo}, {self.hi}]")
        for name in ("u0", "v0"):
            val = getattr(self, name)
            if isinstance(val, (list, tuple)):
                object.__setattr__(self, name, tuple(float(x) for x in val))


@dataclass(frozen=True)
class NetworkSpec:
    """Topology plus strength; ``file`` scales a stored matrix by ``g``."""

    topology: str = "complete"
    n: int = 3
    g: float = 0.02
    matrix: CouplingMatrix | None = None
    matrix_path: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == "file":
            if self.matrix is None:
                raise ValueError("file topology needs a matrix")
            object.__setattr__(self, "n", self.matrix.n)
        if self.n < 1:
            raise InvalidSizeError(f"node count must be positive, got {self.n}")
        if self.g < 0:
            raise ValueError(f"coupling strength must be nonnegative, got {self.g}")

    def build(self) -> CouplingMatrix | None:
        """Coupling matrix, or None for a single node or zero strength."""
        if self.n == 1 or self.g == 0:
            return None
        if self.topology == "complete":
            return complete_network(self.n, self.g)
        if self.topology == "ring":
            return ring_unidirectional(self.n, self.g)
        return self.matrix.scaled(self.g)

    def unit(self) -> CouplingMatrix:
        return replace(self, g=1.0).build()


def stability_max_dt(grid: Grid, params: FhnParams) -> float:
    """Explicit-Euler step bound: ``min(diffusion CFL, eps/6) / 2``."""
    dx2, dy2 = grid.dx**2, grid.dy**2
    diffusion = params.eps * dx2 * dy2 / (2.0 * params.d_u * (dx2 + dy2))
    reaction = params.eps / 6.0
    return min(diffusion, reaction) / 2.0


def coupling_max_dt(G: CouplingMatrix | None, params: FhnParams) -> float:
    """Step bound from the coupling: ``eps / (2 max |c_ii|)`` (half the Gershgorin limit)."""
    if G is None:
        return math.inf
    return params.eps / (2.0 * G.max_degree())


@dataclass(frozen=True)
class SimConfig:
    grid: Grid = field(default_factory=Grid)
    params: FhnParams = field(default_factory=FhnParams)
    forcing: ForcingProfile = field(default_factory=ForcingProfile)
    network: NetworkSpec = field(default_factory=NetworkSpec)
    dt: float = 0.005
    t_end: float = 3000.0
    ic: InitialCondition = field(default_factory=InitialCondition)
    seed: int = 0
    record_every: int = 100
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if not self.dt > 0:
            raise StabilityError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        bound = stability_max_dt(self.grid, self.params)
        if self.dt > bound:
            raise StabilityError(f"dt={self.dt} exceeds stability_max_dt={bound!r}")
        cbound = coupling_max_dt(self.G, self.params)
        if self.dt > cbound:
            raise StabilityError(f"dt={self.dt} exceeds coupling step bound {cbound!r}")

    @property
    def G(self) -> CouplingMatrix | None:
        return self.network.build()

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))

    def with_coupling(self, g: float) -> "SimConfig":
        return replace(self, network=replace(self.network, g=float(g)))


# ---------------------------------------------------------------------------
# initial conditions


def _uniform_block(seed: int, node: int, size: int, lo: float, hi: float) -> np.ndarray:
    # Philox is counter based: node i draws from its own key, cell c is counter c
    key = (int(seed) % 2**64) | (int(node) << 64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.uniform(lo, hi, size)


def _spiral_seed(grid: Grid, node: int) -> tuple[np.ndarray, np.ndarray]:
    x, y = grid.centers()
    if node % 2:
        x = grid.lx - x
    if node % 4 >= 2:
        y = grid.ly - y
    u = np.where(y < grid.ly / 2, 1.8, -1.8) + np.zeros_like(x)
    v = np.where(x < grid.lx / 2, 0.9, -0.9) + np.zeros_like(y)
    return np.broadcast_to(u, grid.shape).copy(), np.broadcast_to(v, grid.shape).copy()


def _per_node(value, n: int) -> list[float]:
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise InvalidSizeError(f"{len(value)} homogeneous values for {n} nodes")
        return [float(x) for x in value]
    return [float(value)] * n


def mixture_random_count(p_percent: float, n: int) -> int:
    return int(math.floor(p_percent * n / 100.0 + 0.5))


def make_initial(ic: InitialCondition, grid: Grid, n: int, seed: int = 0) -> NetworkState:
    u = np.empty((n,) + grid.shape)
    v = np.empty((n,) + grid.shape)
    size = grid.nx * grid.ny
    if ic.kind == "homogeneous":
        for i, (a, b) in enumerate(zip(_per_node(ic.u0, n), _per_node(ic.v0, n))):
            u[i] = a
            v[i] = b
    elif ic.kind == "uniform_random":
        for i in range(n):
            draw = _uniform_block(seed, i, 2 * size, ic.lo, ic.hi)
            u[i] = draw[:size].reshape(grid.shape)
            v[i] = draw[size:].reshape(grid.shape)
    elif ic.kind == "spiral_seed":
        for i in range(n):
            u[i], v[i] = _spiral_seed(grid, i)
    else:
        m = mixture_random_count(ic.p_percent, n)
        for i in range(n):
            if i < m:
                draw = _uniform_block(seed, i, 2 * size, ic.lo, ic.hi)
                u[i] = draw[:size].reshape(grid.shape)
                v[i] = draw[size:].reshape(grid.shape)
            else:
                u[i] = -1.0 + 2.0 * (i + 0.5) / n
                v[i] = 0.0
    return NetworkState.from_arrays(grid, u, v, 0.0)


# ---------------------------------------------------------------------------
# stepping


def step_euler(state: NetworkState, config: SimConfig, step_index: int = 0) -> NetworkState:
    """One forward-Euler step with the numpy reference right-hand side."""
    if state.n != config.n:
        raise InvalidSizeError(f"state has {state.n} nodes, config expects {config.n}")
    grid = state.grid
    u, v = state.arrays()
    c = evaluate_forcing(config.forcing, grid).values
    with np.errstate(over="ignore", invalid="ignore"):  # reported as BlowUpError below
        du, dv = reaction_arrays(u, v, c, config.params, grid.dx, grid.dy)
        G = config.G
        if G is not None:
            du = du + coupling_arrays(u, G.entries, config.params.eps)
        un = u + config.dt * du
        vn = v + config.dt * dv
    bad = ~(np.isfinite(un) & np.isfinite(vn))
    if bad.any():
        node = int(np.argwhere(bad)[0][0])
        raise BlowUpError(
            f"non-finite state at step {step_index} in node {node + 1}", step=step_index, node=node
        )
    return NetworkState.from_arrays(grid, un, vn, state.t + config.dt)


@dataclass
class Snapshot:
    time: float
    node: int
    u: Field
    v: Field
    files: list[str] = field(default_factory=list)


def _snapshot_name(node: int, time: float) -> str:
    return f"node{node + 1}_t{time:g}"


def _take_snapshots(u, v, grid, time, out_dir) -> list[Snapshot]:
    snaps = []
    for i in range(len(u)):
        s = Snapshot(time, i, Field(grid, u[i].copy()), Field(grid, v[i].copy()))
        if out_dir is not None:
            # names like node1_t0.5 carry a dot, so no with_suffix here
            stem = str(Path(out_dir) / _snapshot_name(i, time))
            write_csv(s.u, stem + ".csv")
            write_pgm(s.u, stem + ".pgm")
            s.files = [stem + ".csv", stem + ".pgm"]
        snaps.append(s)
    return snaps


def run(config: SimConfig, out_dir=None, state: NetworkState | None = None):
    """Integrate to ``t_end``; return ``(trace, snapshots)``.

    The trace is sampled every ``record_every`` steps and at the final step
    (the initial state is not a trace sample).  Snapshots are taken at t = 0
    and at every ``snapshot_times`` entry reached; with ``out_dir`` they are
    also written as CSV and P2 graymaps.
    """
    grid = config.grid
    if state is None:
        state = make_initial(config.ic, grid, config.n, config.seed)
    u, v = state.arrays()
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(v)
    ub = np.empty_like(u)
    vb = np.empty_like(v)
    c = np.ascontiguousarray(evaluate_forcing(config.forcing, grid).values)
    G = config.G
    C = G.entries.copy() if G is not None else np.zeros((config.n, config.n))
    p = config.params
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)

    nsteps = config.nsteps
    stops = set(range(config.record_every, nsteps + 1, config.record_every))
    stops.add(nsteps)
    snap_steps = {}
    for ts in config.snapshot_times:
        k = int(round(ts / config.dt))
        if 0 < k <= nsteps:
            snap_steps[k] = ts
            stops.add(k)
    stops.discard(0)
    record_steps = set(range(config.record_every, nsteps + 1, config.record_every)) | {nsteps}

    recorder = diagnostics.TraceRecorder(grid, config.n)
    snapshots = _take_snapshots(u, v, grid, 0.0, out_dir)
    done = 0
    for stop in sorted(stops):
        failed = euler_steps(u, v, c, C, p.eps, p.d_u, p.a_param, p.b_param,
                             grid.dx, grid.dy, config.dt, stop - done, ub, vb)
        if failed >= 0:
            step = done + failed
            bad = ~(np.isfinite(u) & np.isfinite(v))
            node = int(np.argwhere(bad)[0][0])
            trace = recorder.finish()
            raise BlowUpError(
                f"non-finite state at step {step} in node {node + 1}",
                step=step, node=node, partial=(trace, snapshots),
            )
        done = stop
        t = done * config.dt
        if done in record_steps:
            recorder.record(t, u, v)
        if done in snap_steps:
            snapshots += _take_snapshots(u, v, grid, snap_steps[done], out_dir)
    return recorder.finish(), snapshots


def final_state(config: SimConfig) -> NetworkState:
    """Run without recording and return the state at ``t_end``."""
    grid = config.grid
    state = make_initial(config.ic, grid, config.n, config.seed)
    u, v = state.arrays()
    G = config.G
    C = G.entries.copy() if G is not None else np.zeros((config.n, config.n))
    p = config.params
    failed = euler_steps(u, v, evaluate_forcing(config.forcing, grid).values, C, p.eps, p.d_u,
                         p.a_param, p.b_param, grid.dx, grid.dy, config.dt, config.nsteps,
                         np.empty_like(u), np.empty_like(v))
    if failed >= 0:
        raise BlowUpError(f"non-finite state at step {failed}", step=failed)
    return NetworkState.from_arrays(grid, u, v, config.nsteps * config.dt)
