"""Run configuration: defaults, JSON loading and strict key validation."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError

MIXING_DEFAULTS = {
    # "desk" uses the fixed dims below; "asymptotic" uses w = n^3, r = 4^n * r0,
    # epsilon = 1/n and delta = 1/(n^2 + 1)
    "preset": "desk",
    "w1": 1,
    "w2": 1,
    "r": 2,
    "r0": 1,
    "d_grid": [2, 2, 2],
    "epsilon": 2.0,
    "delta": 0.5,
    "order_k": 2,
    "windows": 64,
    "retries": 50,
    "spacer": "deljunco",
    "quadrature_pairs": 4,
    "quadrature_samples": 2000,
}

ASYMMETRIC_DEFAULTS = {
    # t3 lattice spacing at the mod-5 steps is gamma_n + spacing_offset
    "spacing_offset": "1/1",
    "min_radius": 1,
}

INFINITE_DEFAULTS = {
    "separation_factor": "1/1",
}

BUILD_DEFAULTS = {
    "kind": "asymmetric",
    "levels": 10,
    "gamma_integer": True,
    "f0": ["1/1", "1/1", "1/1"],
    "seed": 0,
    "budget": 100_000,
    "mixing": MIXING_DEFAULTS,
    "asymmetric": ASYMMETRIC_DEFAULTS,
    "infinite": INFINITE_DEFAULTS,
}

DIAGNOSTICS_DEFAULTS = {
    "levels": [3, 6, 9],
    "rigidity_levels": [3, 6],
    "t_grid": ["0/1", "1/1", "2/1", "4/1", "8/1", "16/1"],
    "direction": "c",
    "budget": 100_000,
    "samples": 200_000,
    "folner_gammas": ["1/1", "10/1", "100/1", "1000/1"],
    "tiling_params": ["1/1", "1/1", "1/1"],
    "tiling_radius": 2,
    "spectral_gamma": "1/1",
    "spectral_half_width": 8.0,
    "spectral_step": 0.0625,
}

DEFAULTS = {"build": BUILD_DEFAULTS, "diagnostics": DIAGNOSTICS_DEFAULTS}


def _merge(base: dict, override: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}", key=where)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be a table", key=where)
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def resolve(override: dict | None = None, section: str | None = None) -> dict:
    """Defaults merged with ``override``; unknown keys raise ConfigError."""
    base = DEFAULTS if section is None else DEFAULTS[section]
    cfg = _merge(base, override or {}, section or "")
    if section in (None, "build"):
        _check_build(cfg if section else cfg["build"])
    return cfg


def load(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return resolve(data)


def _check_build(cfg: dict):
    if cfg["kind"] not in ("asymmetric", "mixing", "infinite"):
        raise ConfigError(f"unknown schedule kind {cfg['kind']!r}", key="build.kind")
    if not isinstance(cfg["levels"], int) or cfg["levels"] < 1:
        raise ConfigError("levels must be a positive integer", key="build.levels")
    mix = cfg["mixing"]
    if mix["preset"] not in ("desk", "asymptotic"):
        raise ConfigError("mixing.preset must be 'desk' or 'asymptotic'", key="build.mixing.preset")
    if mix["spacer"] not in ("deljunco", "constant"):
        raise ConfigError("mixing.spacer must be 'deljunco' or 'constant'", key="build.mixing.spacer")
    for key in ("w1", "w2", "r0"):
        if not isinstance(mix[key], int) or mix[key] < 1:
            raise ConfigError(f"mixing.{key} must be a positive integer", key=f"build.mixing.{key}")
    if not isinstance(mix["r"], int) or mix["r"] < 2:
        raise ConfigError("mixing.r must be an integer >= 2", key="build.mixing.r")
    if len(mix["d_grid"]) != 3 or any(not isinstance(g, int) or g < 1 for g in mix["d_grid"]):
        raise ConfigError("mixing.d_grid must be three positive integers", key="build.mixing.d_grid")
    if not 0 < mix["delta"] < 1 or mix["epsilon"] <= 0:
        raise ConfigError("need epsilon > 0 and 0 < delta < 1", key="build.mixing")
