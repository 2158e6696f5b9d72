"""Sufficient synchronization conditions built from minimal paths.

Node labels are 0-based throughout the API; the CSV writers shift them to
1-based to match the usual graph drawings.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConnectivityError, DegenerateDampingError, InvalidSizeError
from .network import CouplingMatrix, split_symmetric

TIE_BREAKS = ("lexicographic", "ring_alternating")


@dataclass
class AlphaTable:
    n: int
    alpha: dict[tuple[int, int], int]
    paths: dict[tuple[int, int], tuple[int, ...]]

    def __getitem__(self, edge):
        k, l = sorted(edge)
        return self.alpha.get((k, l), 0)

    def as_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=int)
        for (k, l), a in self.alpha.items():
            m[k, l] = m[l, k] = a
        return m


@dataclass
class ThresholdReport:
    a_const: float
    kappa: float | None
    required: dict[tuple[int, int], float]
    actual: dict[tuple[int, int], float]
    alpha: AlphaTable
    margin: float = field(init=False)
    satisfied: bool = field(init=False)

    def __post_init__(self):
        self.margin = min(self.actual[e] - self.required[e] for e in self.required)
        self.satisfied = self.margin > 0

    def rows(self):
        """``(k, l, eps_kl, alpha_kl, required, margin)`` per edge, 1-based labels."""
        for (k, l) in sorted(self.required):
            eps = self.actual[(k, l)]
            req = self.required[(k, l)]
            yield (k + 1, l + 1, eps, self.alpha[(k, l)], req, eps - req)


def _adjacency(G: CouplingMatrix) -> list[list[int]]:
    n = G.n
    adj = [[] for _ in range(n)]
    for k, l in G.symmetric_edges():
        adj[k].append(l)
        adj[l].append(k)
    for nb in adj:
        nb.sort()
    return adj


def _bfs_dist(adj, src) -> list[int]:
    dist = [-1] * len(adj)
    dist[src] = 0
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _is_index_ring(adj) -> bool:
    n = len(adj)
    return n >= 3 and all(sorted(adj[i]) == sorted({(i - 1) % n, (i + 1) % n}) for i in range(n))


def ring_route(n: int, i: int, j: int) -> tuple[int, ...]:
    """Minimal route between ``i < j`` on the ring ``0-1-...-(n-1)-0``.

    Antipodal pairs of an even ring alternate: the pair whose smaller node
    has 1-based label 1, 3, 5, ... runs upwards, the others run downwards
    (so 1-5 goes 1-2-3-4-5 and 2-6 goes 2-1-8-7-6 when n = 8).
    """
    up = (j - i) % n
    down = (i - j) % n
    if up < down or (up == down and i % 2 == 0):
        return tuple((i + s) % n for s in range(up + 1))
    return tuple((i - s) % n for s in range(down + 1))


def alpha_coefficients(G: CouplingMatrix, tie_break: str = "lexicographic") -> AlphaTable:
    """Per-edge sums of the lengths of the chosen minimal paths through that edge.

    Edge directions are ignored: an edge is any pair with ``eps_kl > 0``.
    ``lexicographic`` picks, for each pair ``i < j``, the lexicographically
    smallest minimal node sequence starting at ``i``.  ``ring_alternating``
    requires the ring ``0-1-...-(n-1)-0`` and uses :func:`ring_route`.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie_break {tie_break!r}, expected one of {TIE_BREAKS}")
    adj = _adjacency(G)
    n = G.n
    if tie_break == "ring_alternating" and not _is_index_ring(adj):
        raise ValueError("ring_alternating tie-break needs the ring 1-2-...-n-1")
    edges = G.symmetric_edges()
    alpha = {e: 0 for e in edges}
    paths = {}
    for j in range(n):
        dist_j = _bfs_dist(adj, j)
        if min(dist_j) < 0:
            raise ConnectivityError("graph of the symmetric part is disconnected")
        for i in range(j):
            if tie_break == "ring_alternating":
                path = ring_route(n, i, j)
            else:
                path = [i]
                x = i
                while x != j:
                    # neighbours are sorted, so the first one a step closer wins
                    x = next(y for y in adj[x] if dist_j[y] == dist_j[x] - 1)
                    path.append(x)
                path = tuple(path)
            paths[(i, j)] = path
            length = len(path) - 1
            for a, b in zip(path, path[1:]):
                alpha[(min(a, b), max(a, b))] += length
    return AlphaTable(n=n, alpha=alpha, paths=paths)


def ring_alpha_closed_form(n: int) -> Fraction:
    """Per-edge coefficient of the unidirectional ring as given by the corollary."""
    if n < 3:
        raise InvalidSizeError(f"ring needs n >= 3, got {n}")
    if n % 2:
        num = n * (n * n - 1)
    elif (n // 2) % 2 == 0:
        num = n * (n * n + 2)
    else:
        num = n * (n * n + 8)
    return Fraction(num, 24)


def theoretical_threshold_complete(a_const, n: int):
    if n < 2:
        raise InvalidSizeError(f"complete network needs n >= 2, got {n}")
    if isinstance(a_const, (int, Fraction)):
        return Fraction(a_const) / n
    return a_const / n


def theoretical_threshold_ring(a_const, n: int):
    """Bound on the ring weight ``c``; exact ``Fraction`` for rational ``a_const``."""
    if n < 3:
        raise InvalidSizeError(f"ring needs n >= 3, got {n}")
    if n % 2:
        m = n * n - 1
    elif (n // 2) % 2 == 0:
        m = n * n + 2
    else:
        m = n * n + 8
    if isinstance(a_const, (int, Fraction)):
        return Fraction(a_const) * m / 12
    return a_const * m / 12


def check_sync_condition(
    G: CouplingMatrix,
    a_const: float,
    tie_break: str = "lexicographic",
    kappa: float | None = None,
) -> ThresholdReport:
    """Test ``a/n * alpha_kl < eps_kl`` on every edge of the symmetric support."""
    eps = split_symmetric(G).E
    table = alpha_coefficients(G, tie_break)
    required = {e: a_const * a / G.n for e, a in table.alpha.items()}
    actual = {(k, l): float(eps[k, l]) for (k, l) in table.alpha}
    return ThresholdReport(a_const=a_const, kappa=kappa, required=required, actual=actual, alpha=table)


def sufficient_coupling(
    G_unit: CouplingMatrix, a_const: float, fhn_eps: float, tie_break: str = "lexicographic"
) -> float:
    """Smallest strength ``g`` beyond which ``g * G_unit`` meets the path condition.

    The FHN network divides the coupling by ``fhn_eps`` (it sits inside the
    ``eps * u_t`` equation), so the graph weight seen by the condition is
    ``g * eps_kl / fhn_eps``.
    """
    report = check_sync_condition(G_unit, a_const, tie_break)
    return fhn_eps * max(report.required[e] / report.actual[e] for e in report.required)


def estimate_constant_a(eps: float, a_param: float, b_param: float, M: float = 2.0):
    """Diagonal constant and damping margin ``(A, kappa)`` for the FHN node.

    With ``F_u = (3 - 3 ubar^2)/eps <= 3/eps`` on ``|ubar| <= M`` and cross term
    ``(a - 1/eps) X1 X2``, Young's inequality against half of the damping
    ``b X2^2`` gives ``kappa = b/2`` and
    ``A = (3/eps) max(1, sup (1 - ubar^2)) + (a - 1/eps)^2 / (2 b)``.
    """
    if not b_param > 0:
        raise DegenerateDampingError(f"recovery damping b must be positive, got {b_param}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if M < 0:
        raise ValueError(f"sup-norm bound must be nonnegative, got {M}")
    # sup of 1 - ubar^2 over |ubar| <= M is attained at ubar = 0
    sup_term = 1.0
    kappa = b_param / 2.0
    A = (3.0 / eps) * max(1.0, sup_term) + (a_param - 1.0 / eps) ** 2 / (2.0 * b_param)
    return A, kappa


def quadratic_form_margin(A, kappa, eps, a_param, b_param, X1, X2, ubar):
    """``-kappa X2^2 - Q``; nonnegative wherever the constant certifies the bound.

    ``Q = X1 F_u X1 + X1 F_v X2 + X2 (-b X2 + a X1) - A X1^2`` with
    ``F_u = (3 - 3 ubar^2)/eps`` and ``F_v = -1/eps``.
    """
    fu = (3.0 - 3.0 * ubar * ubar) / eps
    q = X1 * fu * X1 - X1 * X2 / eps + X2 * (-b_param * X2 + a_param * X1) - A * X1 * X1
    return -kappa * X2 * X2 - q


def certify_constant_a(A, kappa, eps, a_param, b_param, M, points: int = 201) -> float:
    """Minimum of :func:`quadratic_form_margin` over ``[-1,1]^2 x [-M,M]``."""
    x = np.linspace(-1.0, 1.0, points)
    u = np.linspace(-M, M, points)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    worst = np.inf
    for ub in u:
        m = quadratic_form_margin(A, kappa, eps, a_param, b_param, X1, X2, ub)
        worst = min(worst, float(m.min()))
    return worst


def chain_bound_gap(points) -> float:
    """``k * sum |x_{l+1} - x_l|^2 - |x_k - x_0|^2`` for a chain of k+1 points.

    Nonnegative for every chain (Cauchy-Schwarz on the telescoping sum).
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    k = len(x) - 1
    steps = np.diff(x, axis=0)
    total = x[-1] - x[0]
    return float(k * np.sum(steps * steps) - total @ total)
