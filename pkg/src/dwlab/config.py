"""Flat typed run-configuration files.

INI-style sections [potential], [grid], [physics], [time], [solver],
[output]; every key is typed and validated against the schema below, and
unknown sections or keys are hard errors (silent typos in tolerance names
are worse than a failed run).
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .fields import Grid
from .potentials import builtin_harmonic, builtin_harmonic_barrier, builtin_quartic


class ConfigError(ValueError):
    """Malformed, incomplete, or unknown configuration content."""


_REQUIRED = object()

# section -> key -> (type, default); type in {int,float,bool,str,floatlist},
# "?" prefix marks optional (None when absent)
SCHEMA = {
    "potential": {
        "family": ("str", _REQUIRED),
        "a": ("float", 1.0),
        "beta": ("float", 1.0),
        "transverse_freqs": ("floatlist", ()),
        "omega0": ("float", 1.0),
        "barrier_height": ("float", 5.0),
        "barrier_width": ("float", 0.5),
    },
    "grid": {
        "dim": ("int", 1),
        "half_width": ("float", _REQUIRED),
        "points": ("int", _REQUIRED),
    },
    "physics": {
        "hbar": ("float", _REQUIRED),
        "epsilon": ("?float", None),
        "eta": ("?float", None),
        "sigma": ("int", 1),
        "init_state": ("str", "phi_R"),
        "init_seed_c0": ("float", 0.0),
    },
    "time": {
        "rescaled": ("bool", True),
        "steps_per_period": ("int", 10000),
        "periods": ("float", 1.0),
        "dt": ("?float", None),
        "t_final": ("?float", None),
    },
    "solver": {
        "k": ("int", 6),
        "tol": ("float", 1e-10),
        "max_iter": ("int", 600),
        "seed": ("int", 1234),
        "sweep_hbars": ("floatlist", ()),
        "scan_eta_min": ("float", 0.1),
        "scan_eta_max": ("float", 10.0),
        "scan_points": ("int", 0),
        "scan_periods": ("float", 10.0),
        "scan_steps_per_period": ("int", 10000),
        "bisect_width": ("float", 0.01),
        "twomode_steps_per_period": ("int", 2500),
    },
    "output": {
        "stride": ("int", 100),
        "snapshots": ("bool", False),
        "snapshot_stride": ("int", 1),
    },
}

_INIT_STATES = ("phi_R", "phi_L", "phi1", "phi2")


def _coerce(section, key, kind, raw):
    optional = kind.startswith("?")
    if optional:
        kind = kind[1:]
        if raw.strip() == "":
            return None
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "str":
            return raw.strip()
        if kind == "floatlist":
            raw = raw.strip()
            return tuple(float(tok) for tok in raw.split(",")) if raw else ()
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}") from exc
    raise ConfigError(f"internal: unknown schema type {kind}")  # pragma: no cover


def parse_config(path) -> dict:
    """Parse and validate a config file into a nested {section: {key: value}}
    dict with defaults filled in."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    cfg = {}
    for section, keys in SCHEMA.items():
        cfg[section] = {}
        for key, (kind, default) in keys.items():
            if cp.has_option(section, key):
                cfg[section][key] = _coerce(section, key, kind, cp.get(section, key))
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r} in section [{section}]")
            else:
                cfg[section][key] = default

    _validate(cfg)
    return cfg


def _validate(cfg):
    pot = cfg["potential"]
    if pot["family"] not in ("quartic", "harmonic_barrier", "harmonic"):
        raise ConfigError(f"unknown potential family {pot['family']!r}")
    grid = cfg["grid"]
    if grid["dim"] not in (1, 2):
        raise ConfigError("grid dim must be 1 or 2")
    n = grid["points"]
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigError("grid points must be a power of two")
    phys = cfg["physics"]
    if phys["hbar"] <= 0:
        raise ConfigError("hbar must be positive")
    if phys["sigma"] < 1:
        raise ConfigError("sigma must be a positive integer")
    if phys["epsilon"] is not None and phys["eta"] is not None:
        raise ConfigError("set exactly one of epsilon / eta, not both")
    if phys["init_state"] not in _INIT_STATES:
        raise ConfigError(f"init_state must be one of {_INIT_STATES}")
    if pot["family"] == "quartic" and len(pot["transverse_freqs"]) != grid["dim"] - 1:
        raise ConfigError("transverse_freqs must have dim - 1 entries")


def build_potential(cfg):
    pot = cfg["potential"]
    if pot["family"] == "quartic":
        return builtin_quartic(pot["a"], pot["beta"], pot["transverse_freqs"])
    if pot["family"] == "harmonic":
        return builtin_harmonic(pot["omega0"], cfg["grid"]["dim"])
    return builtin_harmonic_barrier(
        pot["omega0"], pot["barrier_height"], pot["barrier_width"], cfg["grid"]["dim"]
    )


def build_grid(cfg) -> Grid:
    g = cfg["grid"]
    return Grid(dim=g["dim"], half_width=g["half_width"], points_per_axis=g["points"])
