"""Cell-centred uniform grid on a rectangle, zero-flux Laplacian and integral norms.

Arrays are stored row-major with shape ``(ny, nx)``: row ``j`` is the y index,
column ``i`` the x index, and the sample ``f[j, i]`` sits at the cell centre
``((i + 1/2) dx, (j + 1/2) dy)``.  All kernels also accept a stack of fields
with leading batch axes (``(..., ny, nx)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, ShapeError


@dataclass(frozen=True)
class Grid:
    nx: int = 100
    ny: int = 100
    lx: float = 100.0
    ly: float = 100.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ShapeError(f"cell counts must be integers, got {self.nx}x{self.ny}")
        if self.nx < 3 or self.ny < 3:
            raise ShapeError(f"grid needs at least 3x3 cells, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ShapeError(f"domain lengths must be positive, got {self.lx}x{self.ly}")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return broadcastable ``(x, y)`` coordinate arrays of the cell centres."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return x[None, :], y[:, None]

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))

    def full(self, value: float) -> "Field":
        return Field(self, np.full(self.shape, float(value)))


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size != self.grid.nx * self.grid.ny:
            raise ShapeError(
                f"field has {values.size} samples, grid needs {self.grid.nx * self.grid.ny}"
            )
        object.__setattr__(self, "values", values.reshape(self.grid.shape))

    def _check(self, other: "Field"):
        if self.grid != other.grid:
            raise GridMismatchError(f"incompatible fields: {self.grid} vs {other.grid}")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


# ---------------------------------------------------------------------------
# array kernels (batch-friendly)


def laplacian_array(f: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """5-point Laplacian with mirror ghost cells on the last two axes."""
    g = np.pad(f, [(0, 0)] * (f.ndim - 2) + [(1, 1), (1, 1)], mode="edge")
    c = g[..., 1:-1, 1:-1]
    lap_x = (g[..., 1:-1, 2:] - 2.0 * c + g[..., 1:-1, :-2]) / (dx * dx)
    lap_y = (g[..., 2:, 1:-1] - 2.0 * c + g[..., :-2, 1:-1]) / (dy * dy)
    return lap_x + lap_y


def integral_array(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Midpoint quadrature over the last two axes."""
    return f.sum(axis=(-2, -1)) * grid.cell_area


def l2_sq_array(f: np.ndarray, grid: Grid) -> np.ndarray:
    return integral_array(f * f, grid)


def h1_sq_array(f: np.ndarray, grid: Grid) -> np.ndarray:
    gx = np.diff(f, axis=-1) / grid.dx
    gy = np.diff(f, axis=-2) / grid.dy
    return ((gx * gx).sum(axis=(-2, -1)) + (gy * gy).sum(axis=(-2, -1))) * grid.cell_area


# ---------------------------------------------------------------------------
# Field-level operations


def laplacian_neumann(f: Field) -> Field:
    return Field(f.grid, laplacian_array(f.values, f.grid.dx, f.grid.dy))


def lq_norm(f: Field, q: float = 2) -> float:
    """``(sum |f|^q dx dy)^(1/q)`` by midpoint quadrature."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    a = np.abs(f.values)
    if q == 2:
        s = float(np.sum(a * a))
    else:
        s = float(np.sum(a**q))
    return (s * f.grid.cell_area) ** (1.0 / q)


def h1_seminorm_sq(f: Field) -> float:
    """Discrete Dirichlet energy: squared forward differences on interior faces.

    Boundary faces carry zero flux and contribute nothing.
    """
    return float(h1_sq_array(f.values, f.grid))


def l2_distance(f: Field, g: Field) -> float:
    return lq_norm(f - g, 2)


# ---------------------------------------------------------------------------
# snapshot export


def write_csv(f: Field, path) -> Path:
    path = Path(path)
    np.savetxt(path, f.values, delimiter=",", fmt="%.17g")
    return path


def read_csv(path, grid: Grid) -> Field:
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    if values.shape != grid.shape:
        raise ShapeError(f"{path}: expected {grid.shape} table, got {values.shape}")
    return Field(grid, values)


def write_pgm(f: Field, path) -> Path:
    """Plain (P2) graymap, 8 bit, linear min/max scaling noted in a header comment."""
    path = Path(path)
    lo = float(f.values.min())
    hi = float(f.values.max())
    span = hi - lo
    if span > 0:
        pix = np.rint((f.values - lo) / span * 255.0).astype(int)
    else:
        pix = np.zeros(f.grid.shape, dtype=int)
    # image row 0 is the top of the picture, i.e. the largest y
    pix = pix[::-1]
    lines = ["P2", f"# min={lo!r} max={hi!r}", f"{f.grid.nx} {f.grid.ny}", "255"]
    lines += [" ".join(map(str, row)) for row in pix]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_pgm(path) -> tuple[np.ndarray, float, float]:
    """Return ``(pixels, min, max)``; pixels in file order (top row first)."""
    lo = hi = None
    tokens = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, val = part.partition("=")
                if key == "min":
                    lo = float(val)
                elif key == "max":
                    hi = float(val)
            continue
        tokens += line.split()
    if tokens[0] != "P2":
        raise ShapeError(f"{path}: not a plain graymap")
    nx, ny = int(tokens[1]), int(tokens[2])  # tokens[3] is the maxval
    pix = np.array([int(t) for t in tokens[4:]], dtype=int).reshape(ny, nx)
    return pix, lo, hi
