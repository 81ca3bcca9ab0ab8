"""Front tracking, speed fits, and envelope certificates for spreading runs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ModelParams, mu_star
from .dynamics import SimulationRecord, logistic_exact
from .elliptic import solve_v_prime
from .errors import DomainError
from .grid import Field, Grid1D

SIDES = ("left", "right")


def bump_initial(grid: Grid1D, radius: float = 2.0, height: float = 1.0) -> Field:
    """Standard compactly supported datum h0 * max(0, 1 - (x/R)^2)."""
    if radius <= 0.0 or height <= 0.0:
        raise DomainError("bump requires positive radius and height")
    if radius >= grid.half_length:
        raise DomainError("bump support must fit inside the domain")
    vals = height * np.maximum(0.0, 1.0 - (grid.x / radius) ** 2)
    return Field(grid, vals)


@dataclass
class FrontTrace:
    theta: float
    side: str
    times: np.ndarray
    positions: np.ndarray
    omitted_times: list[float]


def _front_position(vals: np.ndarray, x: np.ndarray, theta: float, side: str):
    idx = np.nonzero(vals >= theta)[0]
    if idx.size == 0:
        return None
    if side == "right":
        i = int(idx[-1])
        if i == len(vals) - 1:
            return float(x[-1])
        return float(x[i] + (x[i + 1] - x[i]) * (vals[i] - theta) / (vals[i] - vals[i + 1]))
    i = int(idx[0])
    if i == 0:
        return float(x[0])
    return float(x[i] - (x[i] - x[i - 1]) * (vals[i] - theta) / (vals[i] - vals[i - 1]))


def track_front(record: SimulationRecord, theta: float, side: str) -> FrontTrace:
    """Level-theta front positions over time with sub-grid interpolation."""
    if not (0.0 < theta < 1.0):
        raise DomainError(f"threshold must lie in (0, 1), got {theta}")
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")
    times, positions, omitted = [], [], []
    x = record.grid.x
    for t, u in zip(record.times, record.u_snapshots):
        pos = _front_position(u.values, x, theta, side)
        if pos is None:
            omitted.append(t)
        else:
            times.append(t)
            positions.append(pos)
    return FrontTrace(theta=theta, side=side, times=np.asarray(times),
                      positions=np.asarray(positions), omitted_times=omitted)


def estimate_speed(trace: FrontTrace, fit_window: tuple[float, float]) -> tuple[float, float]:
    """Least-squares slope of x_front vs t on the window, with standard error."""
    t_lo, t_hi = fit_window
    mask = (trace.times >= t_lo) & (trace.times <= t_hi)
    t = trace.times[mask]
    pos = trace.positions[mask]
    if t.size < 10:
        raise DomainError(
            f"speed fit needs >= 10 samples in [{t_lo}, {t_hi}], got {t.size}"
        )
    coeffs, cov = np.polyfit(t, pos, 1, cov=True)
    return float(coeffs[0]), float(math.sqrt(max(cov[0][0], 0.0)))


@dataclass
class EnvelopeReport:
    M: float
    mu_star: float
    max_violation: float
    worst_x: float
    worst_t: float
    passed: bool
    logistic_cap_excess: float


def envelope_check(record: SimulationRecord, params: ModelParams) -> EnvelopeReport:
    """Check u(x,t) <= M*exp(mu*(c_mu*t - |x|)) with M from the support radius.

    M = max(e^R/(1-chi), e^R*||u0||), mu the critical decay rate; the report
    also carries the worst excess over the homogeneous logistic bound.
    """
    if record.support_radius is None:
        raise DomainError("envelope check needs the initial support radius metadata")
    R = record.support_radius
    chi = params.chi
    u0_sup = float(np.max(record.u_snapshots[0].values))
    M = max(math.exp(R) / (1.0 - chi), math.exp(R) * u0_sup)
    m = mu_star(params)
    c = m + params.a / m
    absx = np.abs(record.grid.x)

    worst = -math.inf
    worst_x = worst_t = 0.0
    cap_excess = 0.0
    for t, u in zip(record.times, record.u_snapshots):
        bound = M * np.exp(m * (c * t - absx))
        excess = u.values - bound
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst, worst_x, worst_t = float(excess[i]), float(record.grid.x[i]), t
        cap = logistic_exact(t, u0_sup, chi, params.a, params.b)
        cap_excess = max(cap_excess, float(np.max(u.values)) - float(cap))
    return EnvelopeReport(M=M, mu_star=m, max_violation=worst, worst_x=worst_x,
                          worst_t=worst_t, passed=worst <= 1e-6 * M,
                          logistic_cap_excess=max(0.0, cap_excess))


def lower_bound_certificate(record: SimulationRecord, params: ModelParams,
                            t_min: float | None = None, x_min: float = 10.0,
                            method: str = "green_kernel") -> float:
    """Late-time, far-field minimum of 2*sqrt(max(0, 1-chi*v)) - chi*|v_x|.

    The liminf of this quantity bounds the spreading lower speed from below;
    the windowed minimum is reported for comparison with the closed form.
    """
    if t_min is None:
        t_min = 0.5 * record.times[-1]
    chi = params.chi
    mask = np.abs(record.grid.x) >= x_min
    if not np.any(mask):
        raise DomainError("certificate window is empty: x_min exceeds the domain")
    worst = math.inf
    seen = False
    for t, u, v in zip(record.times, record.u_snapshots, record.v_snapshots):
        if t < t_min:
            continue
        seen = True
        vx = solve_v_prime(u, method).values
        cert = 2.0 * np.sqrt(np.maximum(0.0, 1.0 - chi * v.values)) - chi * np.abs(vx)
        worst = min(worst, float(np.min(cert[mask])))
    if not seen:
        raise DomainError("certificate window is empty: no snapshots past t_min")
    return worst
