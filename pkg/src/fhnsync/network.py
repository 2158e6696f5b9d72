"""Coupling matrices with zero row and column sums, builders and file I/O."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import AssumptionViolation, ConnectivityError, InvalidSizeError, ShapeError

#: relative tolerance on row/column sums (file matrices carry decimal rounding)
SUM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Validated connectivity matrix ``G = (c_ik)``.

    Off-diagonal entries are nonnegative, every row and every column sums to
    zero, and the graph of the symmetric part is connected.
    """

    entries: np.ndarray

    def __post_init__(self):
        c = np.array(self.entries, dtype=float)
        validate_entries(c)
        c.setflags(write=False)
        object.__setattr__(self, "entries", c)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def scaled(self, g: float) -> "CouplingMatrix":
        return CouplingMatrix(self.entries * g)

    def permuted(self, perm) -> "CouplingMatrix":
        p = np.asarray(perm)
        return CouplingMatrix(self.entries[np.ix_(p, p)])

    def max_degree(self) -> float:
        """Largest diagonal magnitude ``max_i |c_ii|``."""
        return float(np.max(np.abs(np.diag(self.entries))))

    def symmetric_edges(self) -> list[tuple[int, int]]:
        """Edges ``(k, l)``, ``k < l``, with ``eps_kl > 0`` (0-based)."""
        e = split_symmetric(self).E
        n = self.n
        return [(k, l) for k in range(n) for l in range(k + 1, n) if e[k, l] > 0]


@dataclass(frozen=True)
class SymmetricSplit:
    E: np.ndarray
    L: np.ndarray


def validate_entries(c: np.ndarray) -> None:
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError(f"coupling matrix must be square, got shape {c.shape}")
    n = c.shape[0]
    if n < 2:
        raise InvalidSizeError(f"coupling matrix needs n >= 2 nodes, got {n}")
    if not np.isfinite(c).all():
        raise AssumptionViolation("coupling matrix has non-finite entries")
    off = c[~np.eye(n, dtype=bool)]
    if (off < 0).any():
        i, k = np.argwhere((c < 0) & ~np.eye(n, dtype=bool))[0]
        raise AssumptionViolation(
            f"negative off-diagonal entry c[{i + 1},{k + 1}] = {c[i, k]!r}"
        )
    scale = np.max(np.abs(c))
    tol = SUM_RTOL * scale
    rows = c.sum(axis=1)
    cols = c.sum(axis=0)
    if np.max(np.abs(rows)) > tol:
        i = int(np.argmax(np.abs(rows)))
        raise AssumptionViolation(f"row {i + 1} sums to {rows[i]!r}, expected 0")
    if np.max(np.abs(cols)) > tol:
        k = int(np.argmax(np.abs(cols)))
        raise AssumptionViolation(f"column {k + 1} sums to {cols[k]!r}, expected 0")
    sym = 0.5 * (c + c.T)
    adj = (sym > 0) & ~np.eye(n, dtype=bool)
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise ConnectivityError(f"graph of the symmetric part has {ncomp} components")


def complete_network(n: int, g: float) -> CouplingMatrix:
    if n < 2:
        raise InvalidSizeError(f"complete network needs n >= 2, got {n}")
    if not g > 0:
        raise AssumptionViolation(f"coupling strength must be positive, got {g}")
    c = np.full((n, n), float(g))
    np.fill_diagonal(c, -(n - 1) * float(g))
    return CouplingMatrix(c)


def ring_unidirectional(n: int, c: float) -> CouplingMatrix:
    """``c_ii = -c``, ``c_{i,i+1} = c`` with indices modulo n."""
    if n < 3:
        raise InvalidSizeError(f"ring needs n >= 3, got {n}")
    if not c > 0:
        raise AssumptionViolation(f"coupling strength must be positive, got {c}")
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = -float(c)
    m[idx, (idx + 1) % n] = float(c)
    return CouplingMatrix(m)


def from_undirected_edges(n: int, edges, weight: float = 1.0) -> CouplingMatrix:
    """Symmetric coupling matrix with ``weight`` on each listed edge (0-based pairs)."""
    m = np.zeros((n, n))
    for k, l in edges:
        if k == l:
            raise ShapeError(f"self loop on node {k}")
        m[k, l] = m[l, k] = float(weight)
    np.fill_diagonal(m, -m.sum(axis=1))
    return CouplingMatrix(m)


def split_symmetric(G: CouplingMatrix) -> SymmetricSplit:
    c = G.entries
    return SymmetricSplit(E=0.5 * (c + c.T), L=0.5 * (c - c.T))


_SEP = re.compile(r"[,\s]+")


def load_matrix(text: str) -> CouplingMatrix:
    """Parse n lines of n numbers separated by commas or whitespace; '#' lines are comments."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in _SEP.split(s) if tok])
        except ValueError as exc:
            raise ShapeError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ShapeError("matrix file holds no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() != len(rows):
        raise ShapeError(
            f"matrix must be square: {len(rows)} rows with lengths {sorted({len(r) for r in rows})}"
        )
    return CouplingMatrix(np.array(rows))


def dump_matrix(G: CouplingMatrix) -> str:
    lines = [f"# coupling matrix, n={G.n}"]
    lines += [", ".join(f"{x:.17g}" for x in row) for row in G.entries]
    return "\n".join(lines) + "\n"
