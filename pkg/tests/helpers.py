import itertools

import numpy as np

from fhnsync.errors import ConnectivityError
from fhnsync.network import CouplingMatrix


def random_edges(n, rng, extra_p=0.3):
    """Connected undirected edge list: random spanning tree plus extra edges."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra_p:
                edges.add((a, b))
    return sorted(edges)


def random_coupling(n, rng, directed=True):
    """Valid coupling matrix: symmetric weights on a connected graph plus directed cycles."""
    m = np.zeros((n, n))
    for a, b in random_edges(n, rng):
        w = rng.uniform(0.1, 2.0)
        m[a, b] += w
        m[b, a] += w
    if directed and n >= 3:
        for _ in range(rng.integers(0, 3)):
            k = int(rng.integers(3, n + 1))
            cyc = rng.permutation(n)[:k]
            w = rng.uniform(0.1, 1.0)
            for x, y in zip(cyc, np.roll(cyc, -1)):
                m[x, y] += w
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -m.sum(axis=1))
    return CouplingMatrix(m)


def all_simple_paths(adj, i, j):
    """Every simple path i -> j by exhaustive DFS (no distance pruning)."""
    out = []
    stack = [(i, (i,))]
    while stack:
        x, path = stack.pop()
        if x == j:
            out.append(path)
            continue
        for y in adj[x]:
            if y not in path:
                stack.append((y, path + (y,)))
    return out


def brute_alpha(G, tie_break="lexicographic"):
    n = G.n
    edges = G.symmetric_edges()
    adj = {x: set() for x in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    alpha = {e: 0 for e in edges}
    for i, j in itertools.combinations(range(n), 2):
        paths = all_simple_paths(adj, i, j)
        if not paths:
            raise ConnectivityError("disconnected")
        best = min(len(p) for p in paths)
        minimal = sorted(p for p in paths if len(p) == best)
        if tie_break == "lexicographic" or len(minimal) == 1:
            chosen = minimal[0]
        else:
            # antipodal pair on an even ring: 1-based odd smaller node goes upward
            upward = [p for p in minimal if p[1] == (i + 1) % n]
            downward = [p for p in minimal if p[1] == (i - 1) % n]
            chosen = upward[0] if i % 2 == 0 else downward[0]
        for a, b in zip(chosen, chosen[1:]):
            alpha[(min(a, b), max(a, b))] += len(chosen) - 1
    return alpha
