import math
from dataclasses import replace

import numpy as np
import pytest

from fhnsync.diagnostics import sync_error
from fhnsync.errors import BlowUpError, InvalidSizeError, StabilityError
from fhnsync.fhn import FhnParams, ForcingProfile
from fhnsync.grid import Grid, read_csv
from fhnsync.network import CouplingMatrix
from fhnsync.simulator import (
    InitialCondition, NetworkSpec, NetworkState, SimConfig, coupling_max_dt, final_state,
    make_initial, mixture_random_count, run, stability_max_dt, step_euler,
)

from .helpers import random_coupling

P = FhnParams()
G8 = Grid(8, 8, 8.0, 8.0)


def cfg(**kw):
    base = dict(grid=G8, t_end=1.0, record_every=50, network=NetworkSpec("complete", 3, 0.02))
    base.update(kw)
    return SimConfig(**base)


def test_stability_bound_formula():
    bound = stability_max_dt(Grid(), P)
    assert bound == pytest.approx(min(0.5, 0.1 / 6) / 2, rel=1e-15)
    assert bound == pytest.approx(0.008333, abs=1e-6)


def test_stability_bound_limits():
    # vanishing diffusion leaves the reaction bound
    assert stability_max_dt(Grid(), FhnParams(d_u=1e-12)) == pytest.approx(P.eps / 12)
    # halving dx quarters the diffusion bound (which then governs)
    fine = Grid(1000, 1000, 100.0, 100.0)
    finer = Grid(2000, 2000, 100.0, 100.0)
    assert stability_max_dt(finer, P) == pytest.approx(stability_max_dt(fine, P) / 4, rel=1e-12)


def test_config_rejects_large_dt():
    with pytest.raises(StabilityError, match="stability_max_dt"):
        SimConfig(dt=0.01)
    with pytest.raises(StabilityError):
        SimConfig(dt=0.0)


def test_config_rejects_dt_against_coupling():
    spec = NetworkSpec("complete", 3, 10.0)
    assert coupling_max_dt(spec.build(), P) == pytest.approx(0.1 / 40)
    with pytest.raises(StabilityError, match="coupling"):
        SimConfig(grid=G8, network=spec, dt=0.005)


def test_zero_state_is_fixed_point():
    c = cfg(ic=InitialCondition("homogeneous"))
    s = make_initial(c.ic, G8, 3)
    for k in range(5):
        s = step_euler(s, c, k)
    u, v = s.arrays()
    assert np.all(u == 0) and np.all(v == 0)
    assert s.t == pytest.approx(5 * c.dt)


def ode_euler(u, v, dt, steps, p=P, c0=0.0):
    for _ in range(steps):
        u, v = u + dt * (-u**3 + 3 * u - v) / p.eps, v + dt * (p.a_param * u - p.b_param * v + c0)
    return u, v


@pytest.mark.parametrize("u0,v0", [(0.3, -0.2), (1.5, 0.4), (-1.9, 0.9)])
def test_single_node_matches_scalar_ode(u0, v0):
    c = cfg(network=NetworkSpec("complete", 1, 0.0), ic=InitialCondition("homogeneous", u0, v0),
            t_end=0.5)
    s = step_euler(make_initial(c.ic, G8, 1), c)
    eu, ev = ode_euler(u0, v0, c.dt, 1)
    u, v = s.arrays()
    assert np.abs(u - eu).max() <= 1e-14 and np.abs(v - ev).max() <= 1e-14
    fu, fv = final_state(c).arrays()
    eu, ev = ode_euler(u0, v0, c.dt, c.nsteps)
    assert np.abs(fu - eu).max() <= 1e-12 and np.abs(fv - ev).max() <= 1e-12


def test_kernel_matches_reference_step():
    rng = np.random.default_rng(5)
    G = random_coupling(4, rng)
    c = cfg(network=NetworkSpec("file", g=0.01, matrix=G), t_end=20 * 0.005, record_every=1000,
            forcing=ForcingProfile("excitable_window", radius=2.5), ic=InitialCondition(lo=-2, hi=2))
    s = make_initial(c.ic, G8, 4, seed=9)
    for k in range(c.nsteps):
        s = step_euler(s, c, k)
    ref_u, ref_v = s.arrays()
    fast_u, fast_v = final_state(replace(c, seed=9)).arrays()
    assert np.abs(fast_u - ref_u).max() <= 1e-11
    assert np.abs(fast_v - ref_v).max() <= 1e-11


@pytest.mark.parametrize("g", [0.0, 0.02, 3.0])
def test_identical_nodes_stay_identical(g):
    base = make_initial(InitialCondition(), G8, 1, seed=4)
    u, v = base.arrays()
    state = NetworkState.from_arrays(G8, np.repeat(u, 2, 0), np.repeat(v, 2, 0))
    c = cfg(network=NetworkSpec("complete", 2, g), t_end=2.0, record_every=40,
            dt=0.0025 if g > 1 else 0.005)
    trace, _ = run(c, state=state)
    assert np.all(trace.e_total == 0.0)
    for k in range(3):
        state = step_euler(state, c, k)
    a, b = state.arrays()
    assert np.array_equal(a[0], a[1]) and np.array_equal(b[0], b[1])


def test_run_is_deterministic():
    c = cfg(t_end=2.0)
    assert run(c)[0].to_csv() == run(c)[0].to_csv()


def test_make_initial_homogeneous_zero():
    u, v = make_initial(InitialCondition("homogeneous"), G8, 5).arrays()
    assert np.all(u == 0) and np.all(v == 0)


def test_make_initial_homogeneous_per_node():
    u, _ = make_initial(InitialCondition("homogeneous", u0=(1.0, 2.0)), G8, 2).arrays()
    assert np.all(u[0] == 1) and np.all(u[1] == 2)
    with pytest.raises(InvalidSizeError):
        make_initial(InitialCondition("homogeneous", u0=(1.0, 2.0)), G8, 3)


def test_uniform_random_is_keyed():
    ic = InitialCondition()
    a = make_initial(ic, G8, 3, seed=7).arrays()
    b = make_initial(ic, G8, 5, seed=7).arrays()
    # node draws depend only on (seed, node)
    assert np.array_equal(a[0], b[0][:3]) and np.array_equal(a[1], b[1][:3])
    assert not np.array_equal(a[0][0], a[0][1])
    assert a[0].min() >= -1 and a[0].max() <= 1
    c = make_initial(ic, G8, 3, seed=8).arrays()
    assert not np.array_equal(a[0], c[0])


def test_mixture_counts():
    assert mixture_random_count(50, 20) == 10
    assert mixture_random_count(0, 8) == 0 and mixture_random_count(100, 8) == 8
    u, _ = make_initial(InitialCondition("mixture", p_percent=50), G8, 20, seed=1).arrays()
    homogeneous = [np.all(u[i] == u[i].flat[0]) for i in range(20)]
    assert homogeneous.count(False) == 10
    assert homogeneous[:10] == [False] * 10
    consts = [u[i].flat[0] for i in range(10, 20)]
    assert consts == pytest.approx([-1 + 2 * (i + 0.5) / 20 for i in range(10, 20)])


def test_mixture_rejects_bad_percentage():
    with pytest.raises(ValueError):
        InitialCondition("mixture", p_percent=120)


def test_spiral_seed_pattern():
    u, v = make_initial(InitialCondition("spiral_seed"), G8, 4).arrays()
    assert u[0][0, 0] == 1.8 and u[0][-1, 0] == -1.8
    assert v[0][0, 0] == 0.9 and v[0][0, -1] == -0.9
    assert np.array_equal(u[1], u[0]) and np.array_equal(v[1], v[0][:, ::-1])
    assert np.array_equal(u[2], u[0][::-1]) and np.array_equal(v[2], v[0])


def test_empty_run(tmp_path):
    c = cfg(t_end=0.0)
    trace, snaps = run(c, out_dir=tmp_path)
    assert len(trace) == 0
    assert [(s.time, s.node) for s in snaps] == [(0.0, 0), (0.0, 1), (0.0, 2)]
    assert (tmp_path / "node1_t0.csv").exists() and (tmp_path / "node3_t0.pgm").exists()


def test_snapshots_written(tmp_path):
    c = cfg(t_end=1.0, snapshot_times=(0.5, 1.0))
    trace, snaps = run(c, out_dir=tmp_path)
    assert sorted({s.time for s in snaps}) == [0.0, 0.5, 1.0]
    back = read_csv(tmp_path / "node2_t0.5.csv", G8)
    mid = [s for s in snaps if s.time == 0.5 and s.node == 1][0]
    assert np.array_equal(back.values, mid.u.values)
    assert list(trace.times) == pytest.approx([0.25, 0.5, 0.75, 1.0])


def test_blow_up_reports_step_and_node():
    c = cfg()
    u = np.zeros((3,) + G8.shape)
    u[1, 2, 3] = 1e110
    state = NetworkState.from_arrays(G8, u, np.zeros_like(u))
    with pytest.raises(BlowUpError) as info:
        step_euler(state, c, 7)
    assert info.value.step == 7 and info.value.node == 1
    with pytest.raises(BlowUpError) as info:
        run(c, state=state)
    assert info.value.step == 0 and info.value.node == 1
    trace, snaps = info.value.partial
    assert len(trace) == 0 and len(snaps) == 3


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["homogeneous", "uniform_random", "spiral_seed", "mixture"])
def test_energy_absorbing_witness(kind, energy_suite):
    assert kind in energy_suite


@pytest.fixture(scope="module")
def energy_suite():
    """Late-time max of |u|^2 + |v|^2 per IC kind on a desk grid."""
    out = {}
    grid = Grid(32, 32, 32.0, 32.0)
    for kind in ("homogeneous", "uniform_random", "spiral_seed", "mixture"):
        ic = InitialCondition(kind, u0=(0.5, -0.5, 1.0), v0=0.1)
        c = SimConfig(grid=grid, t_end=300.0, record_every=200, ic=ic, seed=3,
                      network=NetworkSpec("complete", 3, 0.02))
        trace, _ = run(c)
        late = trace.times >= 150.0
        out[kind] = float(np.max(trace.energies["l2_u"][late] + trace.energies["l2_v"][late]))
    hi, lo = max(out.values()), min(out.values())
    assert hi <= 2.0 * lo, out
    return out


@pytest.mark.slow
def test_halving_dt_changes_final_error_little():
    base = SimConfig(grid=Grid(16, 16, 16.0, 16.0), t_end=20.0, record_every=400, seed=2,
                     network=NetworkSpec("complete", 3, 0.05))
    e1 = run(base)[0].e_total[-1]
    e2 = run(replace(base, dt=base.dt / 2, record_every=800))[0].e_total[-1]
    assert e1 > 0 and abs(e1 - e2) <= 0.05 * e1


def test_final_state_time():
    c = cfg(t_end=0.25)
    s = final_state(c)
    assert s.t == pytest.approx(0.25)
    assert s.is_finite()
    assert sync_error(s)[0] > 0


def test_coupling_matrix_entries_used():
    m = CouplingMatrix(np.array([[-1.0, 1.0], [1.0, -1.0]]))
    spec = NetworkSpec("file", g=0.5, matrix=m)
    assert spec.n == 2 and np.array_equal(spec.build().entries, 0.5 * m.entries)
    assert NetworkSpec("ring", 4, 0.0).build() is None
    assert math.isinf(coupling_max_dt(None, P))
