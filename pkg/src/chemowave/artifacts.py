"""Produce the on-disk artifacts for each CLI command.

Outputs are deterministic for a fixed configuration: JSON is written with
sorted keys and no timestamps, CSV numbers with 17 significant digits.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import __version__
from .config import RunConfig, resolved_dict
from .constants import ModelParams, c_star, mu_star, mu_star_N, speed_interval
from .dynamics import StepperConfig, run_lab
from .errors import NumericalError
from .grid import make_grid
from .spreading import bump_initial, envelope_check, estimate_speed, \
    lower_bound_certificate, track_front
from .wave import WaveProfile, construct_wave, decay_ratio, stationary_residual


def write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _envelope_json(cfg: RunConfig, extra: dict) -> dict:
    return {
        "artifact_version": __version__,
        "config": resolved_dict(cfg),
        **extra,
    }


def run_constants(cfg: RunConfig) -> dict:
    p = ModelParams(chi=cfg.chi, a=cfg.a, b=cfg.b, dim=cfg.dim)
    interval = speed_interval(p)
    out = {
        "chi": cfg.chi, "a": cfg.a, "b": cfg.b, "dim": cfg.dim,
        "interval": {"lower": interval.lower, "upper": interval.upper,
                     "lower_valid": interval.lower_valid},
    }
    if cfg.chi > 0.0:
        if cfg.dim == 1:
            m = mu_star(p)
            out["mu_star"] = m
            out["c_star"] = m + cfg.a / m
        else:
            m = mu_star_N(cfg.chi, cfg.dim)
            out["mu_star"] = m
            out["c_star"] = m + 1.0 / m
    else:
        out["mu_star"] = None
        out["c_star"] = 2.0 * math.sqrt(cfg.a)
    return out


def constants_command(cfg: RunConfig) -> dict:
    payload = _envelope_json(cfg, run_constants(cfg))
    os.makedirs(cfg.directory, exist_ok=True)
    write_json(os.path.join(cfg.directory, "constants.json"), payload)
    return payload


def wave_command(cfg: RunConfig) -> tuple[WaveProfile, dict]:
    c = cfg.c
    if c is None:
        c = 2.0 if cfg.chi == 0.0 else c_star(ModelParams(chi=cfg.chi))
    grid = make_grid(cfg.half_length or 60.0, cfg.n or 12000)
    profile = construct_wave(cfg.chi, c, grid=grid, tol_outer=cfg.tol_outer,
                             max_outer=cfg.max_outer, tol_inner=cfg.tol_inner,
                             t_cap=cfg.t_cap)
    residual = stationary_residual(profile)
    summary = _envelope_json(cfg, {
        "c": profile.c, "mu": profile.mu, "chi": profile.chi,
        "stationary_residual": residual,
        "outer_iterations": profile.outer_iterations,
        "final_outer_diff": profile.final_outer_diff,
        "converged": profile.converged,
        "inner_converged_all": profile.inner_converged_all,
    })
    os.makedirs(cfg.directory, exist_ok=True)
    path = os.path.join(cfg.directory, "wave_profile.csv")
    ratio = profile.U.values * np.exp(profile.mu * grid.x)
    with open(path, "w") as fh:
        fh.write("x,U,V,ratio\n")
        for xi, ui, vi, ri in zip(grid.x, profile.U.values, profile.V.values, ratio):
            fh.write(f"{xi:.17g},{ui:.17g},{vi:.17g},{ri:.17g}\n")
    write_json(os.path.join(cfg.directory, "wave_summary.json"), summary)
    if not profile.converged:
        raise NumericalError(
            f"wave construction did not converge within {cfg.max_outer} outer "
            f"iterations (last diff {profile.final_outer_diff:.3e}); artifacts written"
        )
    return profile, summary


def spread_command(cfg: RunConfig, save_snapshots: bool = False):
    p = ModelParams(chi=cfg.chi, a=cfg.a, b=cfg.b, dim=1)
    interval = speed_interval(p)
    L = cfg.half_length
    if L is None:
        L = interval.upper * cfg.t_final + 20.0  # keep fronts off the boundary
    n = cfg.n or int(round(2 * L / 0.01))
    grid = make_grid(L, n)
    u0 = bump_initial(grid, cfg.u0_radius, cfg.u0_height)
    stepper = StepperConfig(dt_max=cfg.dt_max, cfl_advection=cfg.cfl,
                            scheme=cfg.scheme)
    record = run_lab(u0, p, stepper, cfg.t_final, cfg.snapshot_dt,
                     support_radius=cfg.u0_radius)

    os.makedirs(cfg.directory, exist_ok=True)
    fits = {}
    window = (0.5 * cfg.t_final, cfg.t_final)
    for theta in cfg.thresholds:
        right = track_front(record, theta, "right")
        left = track_front(record, theta, "left")
        name = f"front_theta_{theta:g}.csv"
        with open(os.path.join(cfg.directory, name), "w") as fh:
            fh.write("t,x_left,x_right\n")
            left_at = dict(zip(left.times.tolist(), left.positions.tolist()))
            for t, xr in zip(right.times.tolist(), right.positions.tolist()):
                xl = left_at.get(t, float("nan"))
                fh.write(f"{t:.17g},{xl:.17g},{xr:.17g}\n")
        c_hat, stderr = estimate_speed(right, window)
        fits[f"{theta:g}"] = {"speed": c_hat, "stderr": stderr, "file": name}

    certificate = lower_bound_certificate(record, p)
    if cfg.chi > 0.0:
        report = envelope_check(record, p)
        envelope_json = {"M": report.M, "mu_star": report.mu_star,
                         "max_violation": report.max_violation,
                         "passed": report.passed,
                         "logistic_cap_excess": report.logistic_cap_excess}
    else:
        envelope_json = None  # the critical decay rate is undefined at chi = 0
    summary = _envelope_json(cfg, {
        "fitted": fits,
        "interval": {"lower": interval.lower, "upper": interval.upper,
                     "lower_valid": interval.lower_valid},
        "envelope": envelope_json,
        "lower_bound_certificate": certificate,
        "warnings": record.warnings,
    })
    write_json(os.path.join(cfg.directory, "spread_summary.json"), summary)
    if save_snapshots:
        record.save(cfg.directory, prefix="spread")
    return record, summary
