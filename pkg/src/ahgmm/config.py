"""TOML / JSON run configuration.

Recognised tables and keys (all optional)::

    [camera]     f, p_h, p_v, h1, theta_p          # cm, radians
    [face]       x, y, width, height, theta_r, h2
    [threshold]  rho_h_o, rho_v_o                  # px/cm
    [hopping]    q_h, q_v, num_supplementary, gamma
    [svgb]       n_rings, decay
    [attack]     nsr

The secret seed is deliberately not a config key.
"""

from __future__ import annotations

import json
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import AhgmmError, ConfigError
from .geometry import CameraModel, DensityThreshold
from .hopping import HoppingConfig

_SECTIONS = {
    "camera": {"f", "p_h", "p_v", "h1", "theta_p"},
    "face": {"x", "y", "width", "height", "theta_r", "h2"},
    "threshold": {"rho_h_o", "rho_v_o"},
    "hopping": {"q_h", "q_v", "num_supplementary", "gamma"},
    "svgb": {"n_rings", "decay"},
    "attack": {"nsr"},
}


def load_config(path) -> dict:
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        if path.endswith(".json"):
            cfg = json.loads(raw)
        else:
            cfg = tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a table")
    for section, values in cfg.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(values) - _SECTIONS[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def camera_from(cfg: dict):
    if "camera" not in cfg:
        return None
    try:
        return CameraModel(**cfg["camera"])
    except (TypeError, AhgmmError) as exc:
        raise ConfigError(f"[camera]: {exc}") from exc


def threshold_from(cfg: dict, default: float = 0.5) -> DensityThreshold:
    t = cfg.get("threshold", {})
    try:
        return DensityThreshold(t.get("rho_h_o", default), t.get("rho_v_o", default))
    except AhgmmError as exc:
        raise ConfigError(f"[threshold]: {exc}") from exc


def hopping_from(cfg: dict, seed: bytes | None = None) -> HoppingConfig:
    kw = dict(cfg.get("hopping", {}))
    if seed is not None:
        kw["seed"] = seed
    try:
        return HoppingConfig(**kw)
    except AhgmmError as exc:
        raise ConfigError(f"[hopping]: {exc}") from exc
