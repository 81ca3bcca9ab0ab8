"""Time integration: lab-frame system, comoving-frame equation, inner limit.

Two IMEX schemes are provided. Diffusion is always implicit (tridiagonal
solve); advection and the logistic source are explicit:

    imex_be   backward-Euler diffusion + forward-Euler explicit terms.
              First order, L-stable, preserves the pointwise monotone decay
              that the inner limit relies on. Its fixed points satisfy the
              discrete stationary equation exactly, independent of dt.
    imex_cn   Crank-Nicolson diffusion + explicit midpoint for the rest.
              Second order; used where time accuracy matters (the logistic
              equivalence check, grid-convergence studies).

The time step follows the advective CFL rule dt = min(dt_max,
cfl*h/max(|chi*v_x|, eps)); the implicit diffusion keeps the scheme stable
for the frame drift c - chi*v_x as well since dt stays well below 2/drift^2.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels as K
from .constants import ModelParams, c_mu
from .elliptic import solve_v_pair
from .envelopes import EnvelopeParams, eval_u_minus, eval_u_plus, membership_E_mu
from .errors import DomainError, GridMismatchError, NumericalError
from .grid import TOL_NEG, Field, Grid1D, sample, write_csv

_EPS_CFL = 1e-12
_SCHEMES = ("imex_be", "imex_cn")


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # "neumann" (zero-flux) or "dirichlet"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("neumann", "dirichlet"):
            raise DomainError(f"unknown boundary condition kind {self.kind!r}")


NEUMANN = BoundaryCondition("neumann")


def dirichlet(value: float) -> BoundaryCondition:
    return BoundaryCondition("dirichlet", float(value))


@dataclass(frozen=True)
class StepperConfig:
    dt_max: float = 0.02
    cfl_advection: float = 0.5
    scheme: str = "imex_be"
    left_bc: BoundaryCondition = NEUMANN
    right_bc: BoundaryCondition = NEUMANN

    def __post_init__(self):
        if self.dt_max <= 0.0:
            raise DomainError("dt_max must be positive")
        if not (0.0 < self.cfl_advection <= 1.0):
            raise DomainError("cfl_advection must lie in (0, 1]")
        if self.scheme not in _SCHEMES:
            raise DomainError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")


def advective_dt(cfg: StepperConfig, h: float, advection_max: float) -> float:
    return min(cfg.dt_max, cfg.cfl_advection * h / max(advection_max, _EPS_CFL))


def _implicit_factor(grid: Grid1D, coef: float, cfg: StepperConfig):
    """Factor (I - coef*D2) with boundary rows encoding the configured BCs."""
    n = grid.n
    r = coef / (grid.h * grid.h)
    d = np.full(n + 1, 1.0 + 2.0 * r)
    dl = np.full(n, -r)
    du = np.full(n, -r)
    if cfg.left_bc.kind == "neumann":
        du[0] = -2.0 * r
    else:
        d[0] = 1.0
        du[0] = 0.0
    if cfg.right_bc.kind == "neumann":
        dl[-1] = -2.0 * r
    else:
        d[-1] = 1.0
        dl[-1] = 0.0
    return K.tridiag_factor(dl, d, du)


def _apply_d2(vals: np.ndarray, h: float, cfg: StepperConfig) -> np.ndarray:
    out = np.empty_like(vals)
    h2 = h * h
    out[1:-1] = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / h2
    out[0] = (2.0 * vals[1] - 2.0 * vals[0]) / h2 if cfg.left_bc.kind == "neumann" else 0.0
    out[-1] = (2.0 * vals[-2] - 2.0 * vals[-1]) / h2 if cfg.right_bc.kind == "neumann" else 0.0
    return out


def _check_state(vals: np.ndarray, step: int, what: str):
    m = np.min(vals)
    if not (m >= -TOL_NEG) or not np.isfinite(np.max(vals)):
        raise NumericalError(
            f"{what} produced invalid state at step {step}: min={m}, "
            f"finite={bool(np.all(np.isfinite(vals)))}"
        )


class _LabStepper:
    """Explicit advection/source + implicit diffusion for the lab frame."""

    def __init__(self, grid: Grid1D, params: ModelParams, cfg: StepperConfig,
                 method: str = "green_kernel", right_tail: str = "zero"):
        self.grid = grid
        self.p = params
        self.cfg = cfg
        self.method = method
        self.right_tail = right_tail
        self._factored = {}  # dt -> factorization of (I - theta*dt*D2)

    def _factor(self, coef: float):
        f = self._factored.get(coef)
        if f is None:
            f = _implicit_factor(self.grid, coef, self.cfg)
            if len(self._factored) > 8:
                self._factored.clear()
            self._factored[coef] = f
        return f

    def elliptic(self, vals: np.ndarray):
        u = Field(self.grid, vals)
        v, vx = solve_v_pair(u, self.method, self.right_tail)
        return v.values, vx.values

    def _fix_endpoints(self, rhs: np.ndarray, base: np.ndarray, react_state: np.ndarray,
                       v: np.ndarray, dt: float):
        p, cfg = self.p, self.cfg
        for idx, bc in ((0, cfg.left_bc), (-1, cfg.right_bc)):
            if bc.kind == "dirichlet":
                rhs[idx] = bc.value
            else:
                # zero-flux: advection vanishes, the source still acts
                r = react_state[idx] * (
                    p.a - p.chi * v[idx] - (p.b - p.chi) * react_state[idx]
                )
                rhs[idx] = base[idx] + dt * r

    def step(self, vals: np.ndarray, v: np.ndarray, vx: np.ndarray, dt: float) -> np.ndarray:
        g, p, cfg = self.grid, self.p, self.cfg
        if cfg.scheme == "imex_be":
            rhs = K.lab_rhs(vals, v, vx, p.chi, p.a, p.b, g.h, dt)
            self._fix_endpoints(rhs, vals, vals, v, dt)
            return K.tridiag_solve_factored(self._factor(dt), rhs)
        # imex_cn: explicit midpoint for advection/source, CN diffusion
        half = 0.5 * dt
        fact = self._factor(half)
        rhs1 = K.lab_rhs(vals, v, vx, p.chi, p.a, p.b, g.h, half)
        self._fix_endpoints(rhs1, vals, vals, v, half)
        ustar = K.tridiag_solve_factored(fact, rhs1)
        vstar, vxstar = (v, vx) if p.chi == 0.0 else self.elliptic(ustar)
        dt_e = K.lab_rhs(ustar, vstar, vxstar, p.chi, p.a, p.b, g.h, dt) - ustar
        rhs2 = vals + half * _apply_d2(vals, g.h, cfg) + dt_e
        self._fix_endpoints(rhs2, vals, ustar, vstar, dt)
        return K.tridiag_solve_factored(fact, rhs2)


def step_lab(u: Field, params: ModelParams, cfg: StepperConfig,
             method: str = "green_kernel",
             right_tail: str = "zero") -> tuple[Field, Field, float]:
    """One lab-frame IMEX step; returns (u_next, v, dt_used)."""
    _check_state(u.values, 0, "step_lab input")
    st = _LabStepper(u.grid, params, cfg, method, right_tail)
    v, vx = st.elliptic(u.values)
    dt = advective_dt(cfg, u.grid.h, params.chi * float(np.max(np.abs(vx))))
    out = st.step(u.values, v, vx, dt)
    _check_state(out, 1, "step_lab")
    return Field(u.grid, out), Field(u.grid, v), dt


@dataclass
class SimulationRecord:
    """Snapshots of a lab-frame run plus per-snapshot diagnostics."""

    params: ModelParams
    cfg: StepperConfig
    times: list[float] = field(default_factory=list)
    u_snapshots: list[Field] = field(default_factory=list)
    v_snapshots: list[Field] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    support_radius: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def grid(self) -> Grid1D:
        return self.u_snapshots[0].grid

    def save(self, outdir: str, prefix: str = "snapshot"):
        os.makedirs(outdir, exist_ok=True)
        manifest = {
            "times": list(self.times),
            "params": {"chi": self.params.chi, "a": self.params.a,
                       "b": self.params.b, "dim": self.params.dim},
            "grid": {"half_length": self.grid.half_length, "n": self.grid.n},
            "support_radius": self.support_radius,
            "diagnostics": self.diagnostics,
            "warnings": self.warnings,
            "files": [],
        }
        for k, (u, v) in enumerate(zip(self.u_snapshots, self.v_snapshots)):
            fu = f"{prefix}_u_{k:04d}.csv"
            fv = f"{prefix}_v_{k:04d}.csv"
            write_csv(u, os.path.join(outdir, fu))
            write_csv(v, os.path.join(outdir, fv))
            manifest["files"].append({"t": self.times[k], "u": fu, "v": fv})
        with open(os.path.join(outdir, f"{prefix}_manifest.json"), "w") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")


def logistic_exact(t, u0: float, chi: float, a: float = 1.0, b: float = 1.0):
    """Closed-form solution of w' = w*(a - (b-chi)*w), w(0) = u0.

    This is the spatially homogeneous comparison bound; its carrying
    capacity is a/(b-chi). Written in the overflow-safe form."""
    if b - chi <= 0.0:
        raise DomainError("logistic bound needs b - chi > 0")
    if u0 < 0.0:
        raise DomainError("logistic bound needs u0 >= 0")
    t = np.asarray(t, dtype=float)
    if u0 == 0.0:
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out
    cap = a / (b - chi)
    out = cap / (1.0 + (cap / u0 - 1.0) * np.exp(-a * t))
    return float(out) if out.ndim == 0 else out


def run_lab(u0: Field, params: ModelParams, cfg: StepperConfig, t_final: float,
            snapshot_dt: float, support_radius: float | None = None,
            method: str = "green_kernel", right_tail: str = "zero",
            boundary_guard: float = 10.0,
            front_floor: float = 1e-6) -> SimulationRecord:
    """Integrate the lab-frame system to t_final, recording snapshots.

    Snapshot times are exact multiples of snapshot_dt (dt is clipped to land
    on them). Nonnegativity is enforced every step; the logistic comparison
    bound and a boundary-proximity guard are evaluated at snapshots.
    """
    if t_final <= 0.0 or snapshot_dt <= 0.0:
        raise DomainError("run_lab requires t_final > 0 and snapshot_dt > 0")
    _check_state(u0.values, 0, "initial data")
    grid = u0.grid
    st = _LabStepper(grid, params, cfg, method, right_tail)
    rec = SimulationRecord(params=params, cfg=cfg, support_radius=support_radius)
    u0_sup = float(np.max(u0.values))

    def snap(t, vals, v, steps):
        sup = float(np.max(vals))
        bound = float(logistic_exact(t, u0_sup, params.chi, params.a, params.b))
        rec.times.append(t)
        rec.u_snapshots.append(Field(grid, vals))
        rec.v_snapshots.append(Field(grid, v))
        rec.diagnostics.append({
            "t": t, "sup_u": sup, "min_u": float(np.min(vals)),
            "logistic_bound": bound, "cap_excess": max(0.0, sup - bound),
            "steps": steps,
        })
        occupied = np.abs(grid.x[vals > front_floor])
        if occupied.size and float(np.max(occupied)) > grid.half_length - boundary_guard:
            rec.warnings.append(
                f"t={t}: support within {boundary_guard} of the boundary"
            )

    vals = u0.values.copy()
    v, vx = st.elliptic(vals)
    snap(0.0, vals, v, 0)

    n_snaps = int(round(t_final / snapshot_dt))
    steps = 0
    t = 0.0
    for k in range(1, n_snaps + 1):
        t_target = k * snapshot_dt
        while t < t_target - 1e-12:
            if params.chi != 0.0:
                v, vx = st.elliptic(vals)
            dt = advective_dt(cfg, grid.h, params.chi * float(np.max(np.abs(vx))))
            dt = min(dt, t_target - t)
            vals = st.step(vals, v, vx, dt)
            steps += 1
            _check_state(vals, steps, "run_lab")
            t += dt
        t = t_target
        if params.chi == 0.0:
            v, _ = st.elliptic(vals)
        snap(t, vals, v, steps)
    return rec


@dataclass
class InnerResult:
    """Outcome of the frozen-coefficient long-time limit."""

    field: Field
    converged: bool
    t_final: float
    last_diff: float
    checkpoints: int


def step_frame(U: Field, v_frozen: Field, v_prime_frozen: Field, c: float,
               chi: float, cfg: StepperConfig) -> Field:
    """One IMEX step of the comoving-frame equation with frozen coefficients."""
    if U.grid is not v_frozen.grid and U.grid != v_frozen.grid:
        raise GridMismatchError("state and frozen fields live on different grids")
    drift = c - chi * v_prime_frozen.values
    lin = 1.0 - chi * v_frozen.values
    dt = advective_dt(cfg, U.grid.h, chi * float(np.max(np.abs(v_prime_frozen.values))))
    out = _frame_advance(U.values, U.grid, drift, lin, 1.0 - chi, dt, cfg)
    _check_state(out, 1, "step_frame")
    return Field(U.grid, out)


def _frame_fix_endpoints(rhs, base, react_state, lin, gamma, dt, cfg):
    for idx, bc in ((0, cfg.left_bc), (-1, cfg.right_bc)):
        if bc.kind == "dirichlet":
            rhs[idx] = bc.value
        else:
            r = (lin[idx] - gamma * react_state[idx]) * react_state[idx]
            rhs[idx] = base[idx] + dt * r


def _frame_advance(vals, grid, drift, lin, gamma, dt, cfg, factored=None):
    if cfg.scheme == "imex_be":
        rhs = K.frame_rhs(vals, drift, lin, gamma, grid.h, dt)
        _frame_fix_endpoints(rhs, vals, vals, lin, gamma, dt, cfg)
        fact = factored if factored is not None else _implicit_factor(grid, dt, cfg)
        return K.tridiag_solve_factored(fact, rhs)
    half = 0.5 * dt
    fact = factored if factored is not None else _implicit_factor(grid, half, cfg)
    rhs1 = K.frame_rhs(vals, drift, lin, gamma, grid.h, half)
    _frame_fix_endpoints(rhs1, vals, vals, lin, gamma, half, cfg)
    ustar = K.tridiag_solve_factored(fact, rhs1)
    dt_e = K.frame_rhs(ustar, drift, lin, gamma, grid.h, dt) - ustar
    rhs2 = vals + half * _apply_d2(vals, grid.h, cfg) + dt_e
    _frame_fix_endpoints(rhs2, vals, ustar, lin, gamma, dt, cfg)
    return K.tridiag_solve_factored(fact, rhs2)


def evolve_frozen_to_steady(u_frozen: Field, envelope: EnvelopeParams | None,
                            cfg: StepperConfig, tol_inner: float = 1e-8,
                            t_cap: float = 200.0, *, chi: float | None = None,
                            mu: float | None = None, method: str = "green_kernel",
                            dt_check: float = 1.0,
                            sandwich_slack: float = 1e-6) -> InnerResult:
    """Long-time limit of the frame equation started from the upper envelope.

    Coefficients are frozen at u_frozen (one elliptic solve). The state is
    compared at checkpoints dt_check apart; pointwise increase beyond 1e-8
    is a hard error (the decay is guaranteed monotone), sup-difference below
    tol_inner means converged, and exhausting t_cap yields a flagged result.
    """
    if envelope is not None:
        chi, mu = envelope.chi, envelope.mu
    if chi is None or mu is None:
        raise DomainError("evolve_frozen_to_steady needs an envelope or (chi, mu)")
    grid = u_frozen.grid
    c = c_mu(mu)
    cap = 1.0 / (1.0 - chi)
    start = sample(grid, lambda x: np.minimum(cap, np.exp(-mu * x)))
    if envelope is not None:
        member = membership_E_mu(envelope, u_frozen)
        if not member.member:
            raise DomainError(
                f"frozen field is outside the envelope set (violation "
                f"{member.worst_violation:.3e} at x={member.x:.3f})"
            )

    vf_field, vpf_field = solve_v_pair(u_frozen, method)
    vf, vpf = vf_field.values, vpf_field.values
    drift = c - chi * vpf
    lin = 1.0 - chi * vf
    gamma = 1.0 - chi
    dt = advective_dt(cfg, grid.h, chi * float(np.max(np.abs(vpf))))
    steps_per_check = max(1, int(round(dt_check / dt)))
    dt = dt_check / steps_per_check  # land checkpoints exactly
    coef = dt if cfg.scheme == "imex_be" else 0.5 * dt
    fact = _implicit_factor(grid, coef, cfg)

    vals = start.values.copy()
    prev = vals.copy()
    t = 0.0
    converged = False
    last_diff = math.inf
    checkpoints = 0
    n_checks = int(math.ceil(t_cap / dt_check))
    step = 0
    for _ in range(n_checks):
        for _ in range(steps_per_check):
            vals = _frame_advance(vals, grid, drift, lin, gamma, dt, cfg, fact)
            step += 1
            _check_state(vals, step, "evolve_frozen_to_steady")
        t += dt_check
        checkpoints += 1
        increase = float(np.max(vals - prev))
        if increase > 1e-8:
            raise NumericalError(
                f"monotone decay violated at t={t}: pointwise increase {increase:.3e}"
            )
        last_diff = float(np.max(np.abs(vals - prev)))
        prev = vals.copy()
        if last_diff < tol_inner:
            converged = True
            break

    result = Field(grid, vals)
    if envelope is not None:
        lo = eval_u_minus(envelope, grid.x) - sandwich_slack
        hi = eval_u_plus(envelope, grid.x) + sandwich_slack
        if np.any(vals < lo) or np.any(vals > hi):
            worst = float(max(np.max(lo - vals), np.max(vals - hi)))
            raise NumericalError(
                f"inner limit escaped the envelope sandwich by {worst:.3e}"
            )
    return InnerResult(field=result, converged=converged, t_final=t,
                       last_diff=last_diff, checkpoints=checkpoints)


def frame_stationary_residual(U: Field, v_frozen: Field, v_prime_frozen: Field,
                              c: float, chi: float) -> float:
    """Interior sup of the discrete stationary residual with frozen coefficients."""
    h = U.grid.h
    u = U.values
    uxx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    ux = (u[2:] - u[:-2]) / (2.0 * h)
    drift = c - chi * v_prime_frozen.values[1:-1]
    lin = 1.0 - chi * v_frozen.values[1:-1]
    res = uxx + drift * ux + (lin - (1.0 - chi) * u[1:-1]) * u[1:-1]
    return float(np.max(np.abs(res)))
