"""Run configuration: INI-style file plus flag overrides, strictly validated.

Unknown sections or keys are hard errors; a silent typo in a scientific
parameter invalidates an experiment.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace

from .constants import ModelParams, c_star
from .errors import ConfigError

_COMMANDS = ("constants", "wave", "spread", "verify")


@dataclass
class RunConfig:
    command: str = "constants"
    # model
    chi: float = 0.2
    a: float = 1.0
    b: float = 1.0
    dim: int = 1
    # grid (None -> command-specific default)
    half_length: float | None = None
    n: int | None = None
    # stepper
    scheme: str = "imex_be"
    dt_max: float = 0.02
    cfl: float = 0.5
    # wave
    c: float | None = None
    tol_outer: float = 1e-6
    tol_inner: float = 1e-8
    max_outer: int = 50
    t_cap: float = 200.0
    # spread
    t_final: float = 40.0
    snapshot_dt: float = 0.5
    thresholds: tuple = (0.01, 0.1, 0.5)
    u0_radius: float = 2.0
    u0_height: float = 1.0
    # output / verify
    directory: str = "."
    suite: str = "all"
    seed: int = 20240801


def _parse_thresholds(raw: str) -> tuple:
    try:
        vals = tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"thresholds must be a list of numbers: {exc}") from exc
    if not vals:
        raise ConfigError("thresholds must not be empty")
    return vals


# (section, key) -> (attribute, converter)
_SCHEMA = {
    ("model", "chi"): ("chi", float),
    ("model", "a"): ("a", float),
    ("model", "b"): ("b", float),
    ("model", "dim"): ("dim", int),
    ("grid", "half_length"): ("half_length", float),
    ("grid", "n"): ("n", int),
    ("stepper", "scheme"): ("scheme", str),
    ("stepper", "dt_max"): ("dt_max", float),
    ("stepper", "cfl"): ("cfl", float),
    ("wave", "c"): ("c", float),
    ("wave", "tol_outer"): ("tol_outer", float),
    ("wave", "tol_inner"): ("tol_inner", float),
    ("wave", "max_outer"): ("max_outer", int),
    ("wave", "t_cap"): ("t_cap", float),
    ("spread", "t_final"): ("t_final", float),
    ("spread", "snapshot_dt"): ("snapshot_dt", float),
    ("spread", "thresholds"): ("thresholds", _parse_thresholds),
    ("spread", "u0_radius"): ("u0_radius", float),
    ("spread", "u0_height"): ("u0_height", float),
    ("output", "directory"): ("directory", str),
    ("verify", "suite"): ("suite", str),
    ("verify", "seed"): ("seed", int),
}


def parse_config(path: str | None = None, overrides: dict | None = None,
                 command: str = "constants") -> RunConfig:
    """Build a RunConfig from an optional INI file plus flag overrides."""
    cfg = RunConfig(command=command)
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        updates = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                spec = _SCHEMA.get((section, key))
                if spec is None:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                attr, conv = spec
                try:
                    updates[attr] = conv(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{section}] {key}: {exc}") from exc
        cfg = replace(cfg, **updates)
    if overrides:
        known = {f.name for f in fields(RunConfig)}
        bad = set(overrides) - known
        if bad:
            raise ConfigError(f"unknown config overrides: {sorted(bad)}")
        cfg = replace(cfg, **overrides)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Re-validate every cross-module constraint, naming the inequality."""
    if cfg.command not in _COMMANDS:
        raise ConfigError(f"command must be one of {_COMMANDS}, got {cfg.command!r}")
    if not (0.0 <= cfg.chi < 1.0):
        raise ConfigError(f"chi must satisfy 0 <= chi < 1, got {cfg.chi}")
    if cfg.a <= 0.0:
        raise ConfigError(f"a must satisfy a > 0, got {cfg.a}")
    if cfg.b <= 0.0:
        raise ConfigError(f"b must satisfy b > 0, got {cfg.b}")
    if cfg.dim < 1:
        raise ConfigError(f"dim must satisfy dim >= 1, got {cfg.dim}")
    if cfg.half_length is not None and cfg.half_length <= 0.0:
        raise ConfigError(f"half_length must satisfy L > 0, got {cfg.half_length}")
    if cfg.n is not None and cfg.n < 2:
        raise ConfigError(f"n must satisfy n >= 2, got {cfg.n}")
    if cfg.scheme not in ("imex_be", "imex_cn"):
        raise ConfigError(f"scheme must be imex_be or imex_cn, got {cfg.scheme!r}")
    if cfg.dt_max <= 0.0:
        raise ConfigError(f"dt_max must satisfy dt_max > 0, got {cfg.dt_max}")
    if not (0.0 < cfg.cfl <= 1.0):
        raise ConfigError(f"cfl must satisfy 0 < cfl <= 1, got {cfg.cfl}")
    if cfg.t_final <= 0.0 or cfg.snapshot_dt <= 0.0:
        raise ConfigError("t_final and snapshot_dt must be positive")
    for th in cfg.thresholds:
        if not (0.0 < th < 1.0):
            raise ConfigError(f"thresholds must satisfy 0 < theta < 1, got {th}")
    if cfg.u0_radius <= 0.0 or cfg.u0_height <= 0.0:
        raise ConfigError("u0_radius and u0_height must be positive")
    if cfg.command == "wave":
        if not cfg.chi < 0.5:
            raise ConfigError(f"chi must satisfy chi < 1/2 for wave, got {cfg.chi}")
        if cfg.c is not None:
            cs = 2.0 if cfg.chi == 0.0 else c_star(ModelParams(chi=cfg.chi, a=cfg.a, b=cfg.b))
            if cfg.c < cs - 1e-12:
                raise ConfigError(
                    f"c must satisfy c >= c_star(chi) = {cs:.6f}, got {cfg.c}"
                )
    if cfg.tol_outer <= 0.0 or cfg.tol_inner <= 0.0:
        raise ConfigError("tolerances must be positive")
    if cfg.max_outer < 1:
        raise ConfigError(f"max_outer must satisfy max_outer >= 1, got {cfg.max_outer}")
    if cfg.t_cap <= 0.0:
        raise ConfigError(f"t_cap must satisfy t_cap > 0, got {cfg.t_cap}")


def resolved_dict(cfg: RunConfig) -> dict:
    """Plain-dict view embedded into every output JSON."""
    out = {}
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        out[f.name] = list(val) if isinstance(val, tuple) else val
    return out
