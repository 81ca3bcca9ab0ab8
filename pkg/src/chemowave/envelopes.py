"""Exponential envelopes, the admissible set, and the comoving residual operator.

For a decay rate mu in (0, 1) and sensitivity chi, the profiles are squeezed
between

    upper(x) = min( 1/(1-chi), exp(-mu*x) )
    lower(x) = max( 0, exp(-mu*x) - d*exp(-mu_tilde*x) )

with mu < mu_tilde and d > 1 chosen so that `upper` is a super-solution and
`lower` a sub-solution of the frozen-coefficient comoving equation. The
derived constants (a_lower, a_bar, A0, A1, A2, d0) locate the lower
envelope's support edge and maximum and give the admissible floor d0 for d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import c_mu, decay_speed_trade_off
from .elliptic import solve_v, solve_v_prime
from .errors import DomainError, GridMismatchError
from .grid import Field

#: Nodal tolerance for membership in the envelope set.
MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True)
class EnvelopeParams:
    chi: float
    mu: float
    mu_tilde: float
    d: float
    # derived
    a_lower: float
    a_bar: float
    A0: float
    A1: float
    A2: float
    d0: float


def mu_tilde_ceiling(mu: float) -> float:
    """Strict upper limit for mu_tilde at a given mu."""
    return min(1.0, 2.0 * mu, mu + 1.0 / (mu + math.sqrt(1.0 - mu * mu)))


def feasible(chi: float, mu: float) -> bool:
    """Whether (chi, mu) admits the envelope construction."""
    return decay_speed_trade_off(mu) <= (1.0 - chi) / chi


def make_envelope(chi: float, mu: float, mu_tilde: float | None = None,
                  d: float | None = None) -> EnvelopeParams:
    """Build envelope parameters, defaulting mu_tilde and d to safe interior picks.

    mu_tilde defaults to mu + half the distance to its ceiling; d defaults to
    max(1 + 1e-6, d0). Explicit values are validated against the same
    constraints.
    """
    if not (0.0 < chi < 1.0):
        raise DomainError(f"envelope requires 0 < chi < 1, got {chi}")
    if not (0.0 < mu < 1.0):
        raise DomainError(f"envelope requires 0 < mu < 1, got {mu}")
    if not feasible(chi, mu):
        raise DomainError(
            f"(chi, mu)=({chi}, {mu}) infeasible: "
            f"mu*(mu+sqrt(1-mu^2))/(1-mu^2) = {decay_speed_trade_off(mu):.6g} "
            f"exceeds (1-chi)/chi = {(1.0 - chi) / chi:.6g}"
        )
    ceiling = mu_tilde_ceiling(mu)
    if mu_tilde is None:
        mu_tilde = mu + 0.5 * (ceiling - mu)
    if not (mu < mu_tilde < ceiling):
        raise DomainError(
            f"mu_tilde must satisfy mu < mu_tilde < {ceiling:.6g}, got {mu_tilde}"
        )

    s = 1.0 - mu * mu
    root = math.sqrt(s)
    A0 = (mu_tilde - mu) * (1.0 - mu * mu_tilde) / mu
    A1 = chi * mu * (mu + root) / s + chi / s + (1.0 - chi)
    A2 = (1.0 - chi) - chi * mu_tilde * (mu + root) / s + chi / s
    if A0 <= 0.0:
        raise DomainError(f"derived constant A0 = {A0} must be positive")
    if A2 < 0.0:
        raise DomainError(f"derived constant A2 = {A2} must be nonnegative")
    d0 = max(1.0, A1 / A0)
    if d is None:
        d = max(1.0 + 1e-6, d0)
    if d < d0 or d <= 1.0:
        raise DomainError(f"d must satisfy d > 1 and d >= d0 = {d0:.6g}, got {d}")

    a_lower = math.log(d) / (mu_tilde - mu)
    a_bar = (math.log(d * mu_tilde) - math.log(mu)) / (mu_tilde - mu)
    return EnvelopeParams(chi=chi, mu=mu, mu_tilde=mu_tilde, d=d,
                          a_lower=a_lower, a_bar=a_bar,
                          A0=A0, A1=A1, A2=A2, d0=d0)


def eval_phi(mu: float, x):
    """Pure exponential exp(-mu*x)."""
    return np.exp(-mu * np.asarray(x, dtype=float))


def eval_u_plus(p: EnvelopeParams, x):
    return np.minimum(1.0 / (1.0 - p.chi), eval_phi(p.mu, x))


def eval_u_minus(p: EnvelopeParams, x):
    return np.maximum(0.0, eval_phi(p.mu, x) - p.d * eval_phi(p.mu_tilde, x))


def eval_v_plus(p: EnvelopeParams, x):
    return np.minimum(1.0 / (1.0 - p.chi),
                      eval_phi(p.mu, x) / (1.0 - p.mu * p.mu))


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    worst_violation: float
    x: float
    side: str  # "lower" | "upper" | "none"


def membership_E_mu(p: EnvelopeParams, u: Field,
                    tol: float = MEMBERSHIP_TOL) -> MembershipReport:
    """Nodewise test lower - tol <= u <= upper + tol with worst violation."""
    x = u.grid.x
    below = eval_u_minus(p, x) - u.values   # > 0 where u dips under the floor
    above = u.values - eval_u_plus(p, x)    # > 0 where u pokes over the cap
    i_b = int(np.argmax(below))
    i_a = int(np.argmax(above))
    if below[i_b] >= above[i_a]:
        worst, xi, side = float(below[i_b]), float(x[i_b]), "lower"
    else:
        worst, xi, side = float(above[i_a]), float(x[i_a]), "upper"
    if worst <= 0.0:
        return MembershipReport(True, worst, xi, "none")
    return MembershipReport(worst <= tol, worst, xi, side)


def residual_operator_L(p: EnvelopeParams, W: Field, u: Field,
                        method: str = "green_kernel") -> Field:
    """Discretized comoving operator applied to W with coefficients from u.

    res = W_xx + (c_mu - chi*v_x)W_x + (1 - chi*v - (1-chi)W)W with centered
    second-order differences. Endpoint nodes are NaN: one-sided stencils
    would contaminate the sign checks this operator exists for.
    """
    if W.grid != u.grid:
        raise GridMismatchError("W and u must share a grid")
    member = membership_E_mu(p, u)
    if not member.member:
        import warnings
        warnings.warn(
            f"residual_operator_L: u is outside the envelope set "
            f"(violation {member.worst_violation:.3e})", stacklevel=2)
    v = solve_v(u, method).values
    vx = solve_v_prime(u, method).values
    h = W.grid.h
    w = W.values
    out = np.full_like(w, np.nan)
    wxx = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    wx = (w[2:] - w[:-2]) / (2.0 * h)
    drift = c_mu(p.mu) - p.chi * vx[1:-1]
    lin = 1.0 - p.chi * v[1:-1] - (1.0 - p.chi) * w[1:-1]
    out[1:-1] = wxx + drift * wx + lin * w[1:-1]
    return Field(W.grid, out)
