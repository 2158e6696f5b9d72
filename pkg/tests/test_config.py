import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fhnsync.config import LabSettings, desk_config, emit_config, parse_config
from fhnsync.errors import AssumptionViolation, ConfigError, StabilityError
from fhnsync.fhn import ForcingProfile
from fhnsync.grid import Grid
from fhnsync.network import dump_matrix, ring_unidirectional
from fhnsync.simulator import InitialCondition, NetworkSpec, SimConfig, stability_max_dt


def test_empty_config_gives_reference_defaults():
    cfg, lab = parse_config("")
    assert (cfg.params.a_param, cfg.params.b_param, cfg.params.eps, cfg.params.d_u) == (1.0, 0.001, 0.1, 0.05)
    assert (cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly) == (100, 100, 100.0, 100.0)
    assert cfg.t_end == 3000.0 and cfg.dt == 0.005
    assert cfg == SimConfig() and lab == LabSettings()


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="'grid.nz'"):
        parse_config("grid:\n  nz: 4\n")
    with pytest.raises(ConfigError, match="'solver'"):
        parse_config("solver: rk4\n")


def test_large_dt_is_stability_error():
    with pytest.raises(StabilityError, match="stability_max_dt"):
        parse_config("time:\n  dt: 0.02\n")


def test_bad_values_are_config_errors():
    with pytest.raises(ConfigError):
        parse_config("params:\n  eps: -1\n")
    with pytest.raises(ConfigError):
        parse_config("grid: [1, 2]\n")
    with pytest.raises(ConfigError):
        parse_config("grid: {nx: 5\n")


def test_matrix_from_file_and_inline(tmp_path):
    (tmp_path / "m.txt").write_text(dump_matrix(ring_unidirectional(4, 1.0)))
    cfg, _ = parse_config("network:\n  matrix: m.txt\n  g: 0.5\n", base_dir=tmp_path)
    assert cfg.network.topology == "file" and cfg.n == 4
    assert np.array_equal(cfg.G.entries, ring_unidirectional(4, 0.5).entries)
    cfg2, _ = parse_config("network:\n  matrix: [[-1, 1], [1, -1]]\n  g: 0.1\n")
    assert cfg2.n == 2


def test_bad_matrix_propagates():
    with pytest.raises(AssumptionViolation):
        parse_config("network:\n  matrix: [[1, -1], [-1, 1]]\n")


def roundtrip(cfg, lab=None):
    return parse_config(emit_config(cfg, lab))


def test_roundtrip_defaults_and_desk():
    for cfg in (SimConfig(), desk_config(seed=5)):
        assert roundtrip(cfg)[0] == cfg
    lab = LabSettings(g_hi=0.2, p_list=(0, 50), expand=2)
    assert roundtrip(desk_config(), lab)[1] == lab


def test_roundtrip_rich_config():
    cfg = SimConfig(
        grid=Grid(20, 10, 40.0, 20.0), dt=0.004, t_end=12.5, record_every=7, seed=2**63 + 5,
        forcing=ForcingProfile("excitable_window", center=(3.0, 4.0), radius=2.5),
        network=NetworkSpec("file", g=0.3, matrix=ring_unidirectional(5, 1.0)),
        ic=InitialCondition("homogeneous", u0=(0.1, 0.2, 0.3, 0.4, 0.5), v0=-0.2),
        snapshot_times=(1.0, 2.5),
    )
    assert roundtrip(cfg)[0] == cfg


@settings(max_examples=40, deadline=None)
@given(
    st.integers(3, 40), st.integers(3, 40), st.floats(1.0, 200.0), st.integers(1, 12),
    st.floats(0.0, 5.0), st.sampled_from(["complete", "ring"]), st.integers(0, 2**64 - 1),
    st.sampled_from(["homogeneous", "uniform_random", "spiral_seed", "mixture"]),
)
def test_roundtrip_property(nx, ny, lx, n, g, topo, seed, kind):
    grid = Grid(nx, ny, lx, lx * ny / nx)
    n = max(n, 3) if topo == "ring" else n
    net = NetworkSpec(topo, n, g)
    dt = min(0.005, 0.9 * stability_max_dt(grid, SimConfig().params))
    if net.build() is not None:
        dt = min(dt, 0.1 / (2 * net.build().max_degree()))
    cfg = SimConfig(grid=grid, network=net, dt=dt, t_end=1.0, seed=seed, ic=InitialCondition(kind))
    assert roundtrip(cfg)[0] == cfg
