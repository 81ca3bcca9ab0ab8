"""Scalar constants of the model: critical decay rates and speed bounds.

Everything here is a pure function of (chi, a, b, N). The central object is
the strictly increasing map

    g(mu) = mu*(mu + sqrt(1 - mu^2)) / (1 - mu^2),   mu in (0, 1),

whose root against (1-chi)/chi defines the critical decay rate mu_star and
through it the critical speed c_star = mu_star + a/mu_star. The dimension-N
variant carries an extra 2^N*sqrt(N) factor and lives on (0, 1/sqrt(N)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

#: Bracket inset: g has a pole at the right endpoint of its domain.
_EDGE = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: sensitivity chi, source u*(a - b*u), dimension."""

    chi: float
    a: float = 1.0
    b: float = 1.0
    dim: int = 1

    def __post_init__(self):
        # chi = 0 is admitted as the chemotaxis-off control (plain logistic
        # reaction-diffusion); the critical-rate operations still require
        # chi > 0 and raise individually.
        if not (0.0 <= self.chi < 1.0):
            raise DomainError(f"chi must satisfy 0 <= chi < 1, got {self.chi}")
        if self.a <= 0.0:
            raise DomainError(f"a must be positive, got {self.a}")
        if self.b <= 0.0:
            raise DomainError(f"b must be positive, got {self.b}")
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")

    @property
    def generalized_regime(self) -> bool:
        """chi < b/2: the (a, b)-generalized critical speed is defined."""
        return self.chi < self.b / 2.0

    @property
    def lower_bound_regime(self) -> bool:
        """chi below the threshold that keeps the spreading lower bound positive."""
        return self.chi < lower_bound_threshold(self)

    @property
    def wave_regime(self) -> bool:
        """chi < 1/2: regime in which wave profiles are constructed."""
        return self.chi < 0.5


@dataclass(frozen=True)
class SpeedInterval:
    """Theoretical bounds [lower, upper] on the spreading speed."""

    lower: float
    upper: float
    lower_valid: bool

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise DomainError("speed interval requires 0 <= lower <= upper")


def c_mu(mu: float) -> float:
    """Speed mu + 1/mu associated with exponential decay rate mu in (0, 1]."""
    if not (0.0 < mu <= 1.0):
        raise DomainError(f"c_mu requires 0 < mu <= 1, got {mu}")
    return mu + 1.0 / mu


def mu_of_c(c: float) -> float:
    """The root of mu + 1/mu = c in (0, 1]; requires c >= 2."""
    if c < 2.0:
        raise DomainError(f"mu_of_c requires c >= 2, got {c}")
    return (c - math.sqrt(c * c - 4.0)) / 2.0


def decay_speed_trade_off(mu: float) -> float:
    """g(mu): strictly increasing on (0, 1), 0 at 0+, +inf at 1-."""
    s = 1.0 - mu * mu
    return mu * (mu + math.sqrt(s)) / s


def _bisect_increasing(f, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of an increasing f with f(lo) <= 0 <= f(hi), to machine precision."""
    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise DomainError("bisection bracket does not straddle the root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mu_star(params: ModelParams) -> float:
    """Critical decay rate for the N=1 model.

    For a = b = 1 this is the unique root of g(mu) = (1-chi)/chi in (0, 1).
    For general (a, b) it is the supremum of mu in (0, min(1, sqrt(a))) with
    g(mu) <= (b-chi)/chi; the right endpoint is returned (inset by _EDGE)
    when the inequality never binds there.
    """
    if params.dim != 1:
        raise DomainError("mu_star is the N=1 constant; use mu_star_N for N >= 2")
    if not (0.0 < params.chi < params.b):
        raise DomainError(
            f"mu_star requires 0 < chi < b, got chi={params.chi}, b={params.b}"
        )
    target = (params.b - params.chi) / params.chi
    hi = min(1.0, math.sqrt(params.a)) - _EDGE
    if decay_speed_trade_off(hi) <= target:
        return hi  # supremum saturates at the endpoint
    return _bisect_increasing(lambda m: decay_speed_trade_off(m) - target, _EDGE, hi)


def c_star(params: ModelParams) -> float:
    """Critical wave speed mu_star + a/mu_star."""
    m = mu_star(params)
    return m + params.a / m


def mu_star_N(chi: float, N: int) -> float:
    """Critical decay rate in dimension N, the root in (0, 1/sqrt(N)) of
    2^N*sqrt(N)*mu*(mu + sqrt(1 - N*mu^2))/(1 - N*mu^2) = (1-chi)/chi."""
    if not (0.0 < chi < 1.0):
        raise DomainError(f"mu_star_N requires 0 < chi < 1, got {chi}")
    if N < 1:
        raise DomainError(f"mu_star_N requires N >= 1, got {N}")
    target = (1.0 - chi) / chi
    scale = (2.0 ** N) * math.sqrt(N)

    def f(mu: float) -> float:
        s = 1.0 - N * mu * mu
        return scale * mu * (mu + math.sqrt(s)) / s - target

    hi = 1.0 / math.sqrt(N) - _EDGE
    return _bisect_increasing(f, _EDGE, hi)


def lower_bound_threshold(params: ModelParams) -> float:
    """chi threshold below which the spreading lower bound is positive."""
    if params.a == 1.0 and params.b == 1.0:
        return 2.0 / (3.0 + math.sqrt(params.dim + 1.0))
    return 2.0 * params.b / (3.0 + math.sqrt(params.a + 1.0))


def speed_interval(params: ModelParams) -> SpeedInterval:
    """Theoretical spreading-speed bounds for the supported parameter regimes.

    N=1, a=b=1: upper = min(2 + chi/(1-chi), c_star); N>=2, a=b=1: upper =
    min(2 + sqrt(N)*chi/(1-chi), c_mu(mu_star_N)); N=1 general (a, b):
    upper = 2*sqrt(a) + a*chi/(b-chi). The lower bound is reported as 0 with
    lower_valid=False when chi exceeds its validity threshold.
    """
    chi = params.chi
    unit_source = params.a == 1.0 and params.b == 1.0
    if not unit_source and params.dim != 1:
        raise DomainError("speed_interval: general (a, b) is only supported for N = 1")
    if chi == 0.0:
        # chemotaxis off: the interval collapses to the scalar-equation speed
        s = 2.0 * math.sqrt(params.a)
        return SpeedInterval(lower=s, upper=s, lower_valid=True)

    if unit_source:
        r = chi / (1.0 - chi)
        if params.dim == 1:
            upper = min(2.0 + r, c_star(params))
        else:
            m = mu_star_N(chi, params.dim)
            upper = min(2.0 + math.sqrt(params.dim) * r, m + 1.0 / m)
        lower_raw = 2.0 * math.sqrt(max(0.0, 1.0 - r)) - math.sqrt(params.dim) * r
    else:
        if not (0.0 < chi < params.b):
            raise DomainError(
                f"speed_interval requires 0 < chi < b, got chi={chi}, b={params.b}"
            )
        ra = params.a * chi / (params.b - chi)
        upper = 2.0 * math.sqrt(params.a) + ra
        lower_raw = 2.0 * math.sqrt(max(0.0, params.a - ra)) - ra

    valid = chi < lower_bound_threshold(params)
    lower = lower_raw if valid and lower_raw > 0.0 else 0.0
    return SpeedInterval(lower=lower, upper=upper, lower_valid=valid and lower_raw > 0.0)
