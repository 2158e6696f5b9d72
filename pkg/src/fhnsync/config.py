"""YAML key-tree configuration: parsing with defaults, validation and emission.

Every key is optional.  Defaults reproduce the reference scenario: eps = 0.1,
a = 1, b = 0.001, the 100 x 100 domain on a 100 x 100 grid, T = 3000.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import yaml

from . import diagnostics
from .errors import ConfigError
from .fhn import FhnParams, ForcingProfile
from .grid import Grid
from .network import load_matrix
from .simulator import InitialCondition, NetworkSpec, SimConfig


@dataclass(frozen=True)
class LabSettings:
    g_lo: float = 0.0
    g_hi: float = 0.05
    resolution: float = 1e-3
    tol_rel: float = diagnostics.TOL_REL
    window_frac: float = diagnostics.WINDOW_FRAC
    n_from: int = 3
    n_to: int = 8
    p_list: tuple[float, ...] = ()
    expand: int = 0
    coarse: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))


# section -> (key in file -> attribute name)
_GRID = {"nx": "nx", "ny": "ny", "lx": "lx", "ly": "ly"}
_PARAMS = {"eps": "eps", "d_u": "d_u", "a": "a_param", "b": "b_param"}
_FORCING = {"kind": "kind", "level": "level", "outside_level": "outside_level",
            "center": "center", "radius": "radius"}
_NETWORK = {"topology": "topology", "n": "n", "g": "g", "matrix": "matrix"}
_TIME = {"dt": "dt", "t_end": "t_end", "record_every": "record_every",
         "snapshot_times": "snapshot_times"}
_INITIAL = {"kind": "kind", "u0": "u0", "v0": "v0", "lo": "lo", "hi": "hi", "p_percent": "p_percent"}
_LAB = {f.name: f.name for f in fields(LabSettings)}
_SECTIONS = {"grid": _GRID, "params": _PARAMS, "forcing": _FORCING, "network": _NETWORK,
             "time": _TIME, "initial": _INITIAL, "lab": _LAB}
_TOP_SCALARS = ("seed",)


def _section(tree: dict, name: str) -> dict:
    raw = tree.get(name) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    allowed = _SECTIONS[name]
    out = {}
    for key, val in raw.items():
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'")
        out[allowed[key]] = val
    return out


def parse_config(text: str, base_dir=None) -> tuple[SimConfig, LabSettings]:
    """Parse and validate; ``network.matrix`` may be inline rows or a file path."""
    try:
        tree = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"unparsable config: {exc}".replace("\n", " ")) from None
    tree = tree or {}
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    for key in tree:
        if key not in _SECTIONS and key not in _TOP_SCALARS:
            raise ConfigError(f"unknown key '{key}'")

    try:
        grid = Grid(**_section(tree, "grid"))
        params = FhnParams(**_section(tree, "params"))
        forcing = ForcingProfile(**_section(tree, "forcing"))
        net = _section(tree, "network")
        if "matrix" in net:
            src = net.pop("matrix")
            if isinstance(src, str):
                path = Path(src)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                net["matrix"] = load_matrix(path.read_text())
                net["matrix_path"] = str(src)
            elif src is not None:
                rows = "\n".join(" ".join(repr(float(x)) for x in row) for row in src)
                net["matrix"] = load_matrix(rows)
            net.setdefault("topology", "file")
        network = NetworkSpec(**net)
        ic = InitialCondition(**_section(tree, "initial"))
        time = _section(tree, "time")
        lab = LabSettings(**_section(tree, "lab"))
        cfg = SimConfig(grid=grid, params=params, forcing=forcing, network=network, ic=ic,
                        seed=int(tree.get("seed", 0)), **time)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, lab


def config_tree(cfg: SimConfig, lab: LabSettings | None = None) -> dict:
    lab = lab or LabSettings()
    net = {"topology": cfg.network.topology, "n": cfg.network.n, "g": cfg.network.g}
    if cfg.network.matrix is not None:
        net["matrix"] = [[float(x) for x in row] for row in cfg.network.matrix.entries]
    ic = cfg.ic
    return {
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny, "lx": cfg.grid.lx, "ly": cfg.grid.ly},
        "params": {"eps": cfg.params.eps, "d_u": cfg.params.d_u,
                   "a": cfg.params.a_param, "b": cfg.params.b_param},
        "forcing": {"kind": cfg.forcing.kind, "level": cfg.forcing.level,
                    "outside_level": cfg.forcing.outside_level,
                    "center": list(cfg.forcing.center) if cfg.forcing.center else None,
                    "radius": cfg.forcing.radius},
        "network": net,
        "time": {"dt": cfg.dt, "t_end": cfg.t_end, "record_every": cfg.record_every,
                 "snapshot_times": list(cfg.snapshot_times)},
        "initial": {"kind": ic.kind,
                    "u0": list(ic.u0) if isinstance(ic.u0, tuple) else ic.u0,
                    "v0": list(ic.v0) if isinstance(ic.v0, tuple) else ic.v0,
                    "lo": ic.lo, "hi": ic.hi, "p_percent": ic.p_percent},
        "seed": cfg.seed,
        "lab": {"g_lo": lab.g_lo, "g_hi": lab.g_hi, "resolution": lab.resolution,
                "tol_rel": lab.tol_rel, "window_frac": lab.window_frac, "n_from": lab.n_from,
                "n_to": lab.n_to, "p_list": list(lab.p_list), "expand": lab.expand,
                "coarse": lab.coarse},
    }


def emit_config(cfg: SimConfig, lab: LabSettings | None = None) -> str:
    return yaml.safe_dump(config_tree(cfg, lab), sort_keys=False)


def desk_config(**overrides) -> SimConfig:
    """32 x 32 cells at dx = 1, T = 300, 200 trace samples."""
    base = SimConfig(grid=Grid(32, 32, 32.0, 32.0), t_end=300.0, record_every=300)
    return replace(base, **overrides)
