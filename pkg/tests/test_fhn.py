import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fhnsync.errors import GridMismatchError, InvalidSizeError
from fhnsync.fhn import (
    FhnParams, ForcingProfile, coupling_arrays, coupling_rhs, evaluate_forcing, reaction_arrays,
    reaction_rhs,
)
from fhnsync.grid import Field, Grid
from fhnsync.network import complete_network

from .helpers import random_coupling

P = FhnParams()
ZERO = ForcingProfile()


def small():
    return Grid(6, 5, 6.0, 5.0)


def test_origin_is_equilibrium():
    g = small()
    du, dv = reaction_rhs(g.zeros(), g.zeros(), P, ZERO)
    assert np.all(du.values == 0) and np.all(dv.values == 0)


def test_unit_state():
    g = small()
    du, dv = reaction_rhs(g.full(1.0), g.zeros(), P, ZERO)
    np.testing.assert_allclose(du.values, 20.0, rtol=1e-14)
    np.testing.assert_allclose(dv.values, 1.0, rtol=1e-14)


def test_cubic_nullcline():
    g = small()
    du, _ = reaction_rhs(g.full(math.sqrt(3.0)), g.zeros(), P, ZERO)
    assert np.abs(du.values).max() <= 1e-13


def test_reaction_grid_mismatch():
    with pytest.raises(GridMismatchError):
        reaction_rhs(Grid(3, 3, 1.0, 1.0).zeros(), Grid(3, 3, 2.0, 1.0).zeros(), P, ZERO)


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        FhnParams(b_param=0.0)


def test_two_node_coupling():
    g = small()
    rng = np.random.default_rng(1)
    u1, u2 = rng.normal(size=g.shape), rng.normal(size=g.shape)
    nodes = [(Field(g, u1), g.zeros()), (Field(g, u2), g.zeros())]
    inc = coupling_rhs(nodes, complete_network(2, 0.3), P)
    np.testing.assert_allclose(inc[0].values, 0.3 * (u2 - u1) / P.eps, rtol=1e-13, atol=1e-13)


def test_identical_nodes_get_zero_coupling():
    g = small()
    f = Field(g, np.random.default_rng(2).normal(size=g.shape))
    inc = coupling_rhs([(f, g.zeros())] * 4, random_coupling(4, np.random.default_rng(3)), P)
    for x in inc:
        assert np.abs(x.values).max() <= 1e-12


def test_coupling_size_mismatch():
    g = small()
    with pytest.raises(InvalidSizeError):
        coupling_rhs([(g.zeros(), g.zeros())] * 2, complete_network(3, 1.0), P)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_coupling_matches_double_loop(n, seed):
    rng = np.random.default_rng(seed)
    G = random_coupling(n, rng)
    u = rng.normal(size=(n, 3, 4))
    fast = coupling_arrays(u, G.entries, P.eps)
    slow = np.zeros_like(u)
    for i in range(n):
        for y in range(3):
            for x in range(4):
                slow[i, y, x] = sum(G.entries[i, k] * u[k, y, x] for k in range(n)) / P.eps
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-12)
    # zero column sums: increments cancel pointwise
    assert np.abs(fast.sum(axis=0)).max() <= 1e-10 * (1 + np.abs(fast).max())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_manifold_invariance(seed):
    rng = np.random.default_rng(seed)
    g = small()
    u = np.broadcast_to(rng.normal(size=g.shape), (3,) + g.shape).copy()
    v = np.broadcast_to(rng.normal(size=g.shape), (3,) + g.shape).copy()
    c = evaluate_forcing(ForcingProfile("excitable_window", radius=2.0), g).values
    du, dv = reaction_arrays(u, v, c, P, g.dx, g.dy)
    du = du + coupling_arrays(u, random_coupling(3, rng).entries, P.eps)
    for i in (1, 2):
        assert np.abs(du[i] - du[0]).max() <= 1e-12 * (1 + np.abs(du).max())
        assert np.array_equal(dv[i], dv[0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_odd_symmetry(seed):
    rng = np.random.default_rng(seed)
    g = small()
    u, v = rng.normal(size=g.shape) * 2, rng.normal(size=g.shape)
    c = np.zeros(g.shape)
    du, dv = reaction_arrays(u, v, c, P, g.dx, g.dy)
    mdu, mdv = reaction_arrays(-u, -v, c, P, g.dx, g.dy)
    assert np.array_equal(mdu, -du) and np.array_equal(mdv, -dv)


def test_forcing_constant():
    assert np.all(evaluate_forcing(ZERO, small()).values == 0.0)
    assert np.all(evaluate_forcing(ForcingProfile(level=0.3), small()).values == 0.3)


def test_forcing_window_cell_count():
    g = Grid()
    f = evaluate_forcing(ForcingProfile("excitable_window", center=(50.0, 50.0), radius=5.0), g)
    x = np.arange(100) + 0.5
    count = sum((xi - 50) ** 2 + (yi - 50) ** 2 <= 25 for xi in x for yi in x)
    assert count == 80  # centres at half-integers; the disk area is 25 pi ~ 79
    assert np.sum(f.values == 0.0) == count
    assert np.sum(f.values == -1.1) == 10000 - count


def test_forcing_default_center_is_domain_center():
    g = Grid(20, 20, 20.0, 20.0)
    a = evaluate_forcing(ForcingProfile("excitable_window", radius=3.0), g)
    b = evaluate_forcing(ForcingProfile("excitable_window", center=(10.0, 10.0), radius=3.0), g)
    assert np.array_equal(a.values, b.values)


def test_forcing_huge_radius_covers_domain():
    f = evaluate_forcing(ForcingProfile("excitable_window", level=0.2, radius=1e3), small())
    assert np.all(f.values == 0.2)


def test_forcing_rejects_bad_radius():
    with pytest.raises(ValueError):
        ForcingProfile("excitable_window", radius=0.0)
