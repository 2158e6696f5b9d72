"""FitzHugh-Nagumo node dynamics and the network coupling term.

Each node obeys::

    eps u_t = d_u lap(u) - u^3 + 3u - v + sum_k c_ik u_k
        v_t = a u - b v + c(x)

so the coupling enters divided by ``eps``, as in the fully connected and
ring systems where the strength ``g_n`` multiplies ``(u_i - u_j)`` inside
the ``eps u_t`` equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidSizeError
from .grid import Field, Grid, laplacian_array
from .network import CouplingMatrix


@dataclass(frozen=True)
class FhnParams:
    eps: float = 0.1
    d_u: float = 0.05
    a_param: float = 1.0
    b_param: float = 0.001

    def __post_init__(self):
        for name in ("eps", "d_u", "a_param", "b_param"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class ForcingProfile:
    """Forcing ``c(x)``: a constant, or ``level`` inside a disk and ``outside_level`` elsewhere.

    ``center=None`` means the centre of the domain.
    """

    kind: str = "constant"
    level: float = 0.0
    outside_level: float = -1.1
    center: tuple[float, float] | None = None
    radius: float = 5.0

    def __post_init__(self):
        if self.kind not in ("constant", "excitable_window"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "excitable_window" and not self.radius > 0:
            raise ValueError(f"window radius must be positive, got {self.radius}")
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def evaluate_forcing(forcing: ForcingProfile, grid: Grid) -> Field:
    if forcing.kind == "constant":
        return grid.full(forcing.level)
    cx, cy = forcing.center if forcing.center is not None else (grid.lx / 2, grid.ly / 2)
    x, y = grid.centers()
    inside = (x - cx) ** 2 + (y - cy) ** 2 <= forcing.radius**2
    return Field(grid, np.where(inside, forcing.level, forcing.outside_level))


def reaction_arrays(u, v, c, params: FhnParams, dx: float, dy: float):
    """Array form of :func:`reaction_rhs`; works on stacks ``(..., ny, nx)``."""
    du = (params.d_u * laplacian_array(u, dx, dy) - u * u * u + 3.0 * u - v) / params.eps
    dv = params.a_param * u - params.b_param * v + c
    return du, dv


def reaction_rhs(u: Field, v: Field, params: FhnParams, forcing: ForcingProfile):
    if u.grid != v.grid:
        raise GridMismatchError(f"u and v live on different grids: {u.grid} vs {v.grid}")
    c = evaluate_forcing(forcing, u.grid).values
    du, dv = reaction_arrays(u.values, v.values, c, params, u.grid.dx, u.grid.dy)
    return Field(u.grid, du), Field(u.grid, dv)


def coupling_arrays(u: np.ndarray, entries: np.ndarray, eps: float) -> np.ndarray:
    """``(sum_k c_ik u_k) / eps`` accumulated over k in index order."""
    out = np.zeros_like(u)
    n = u.shape[0]
    for i in range(n):
        acc = out[i]
        for k in range(n):
            cik = entries[i, k]
            if cik != 0.0:
                acc += cik * u[k]
        acc /= eps
    return out


def coupling_rhs(states, G: CouplingMatrix, params: FhnParams) -> list[Field]:
    """Per-node u increments from the coupling; ``states`` is a NetworkState or list of (u, v)."""
    nodes = states.nodes if hasattr(states, "nodes") else states
    if len(nodes) != G.n:
        raise InvalidSizeError(f"{len(nodes)} node states for a {G.n}-node coupling matrix")
    grid = nodes[0][0].grid
    u = np.stack([uv[0].values for uv in nodes])
    inc = coupling_arrays(u, G.entries, params.eps)
    return [Field(grid, inc[i]) for i in range(G.n)]
