"""Acceptance criteria as executable checks, shared by the CLI and pytest.

Each criterion is a function of a VerifyContext; heavy artifacts (the
chi = 0.2 wave, the two spreading runs, the Fisher controls) are built once
and cached on the context so the spreading and envelope criteria reuse the
same run. All tolerances are fixed here, not calibrated at run time.
"""

from __future__ import annotations

import filecmp
import math
import os
import tempfile
import threading
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .config import RunConfig
from .constants import ModelParams, c_mu, c_star, decay_speed_trade_off, \
    mu_star, speed_interval
from .dynamics import StepperConfig, evolve_frozen_to_steady, logistic_exact, run_lab
from .elliptic import kernel_identity_check, solve_v, solve_v_pair
from .envelopes import make_envelope, membership_E_mu, residual_operator_L
from .grid import Field, interp, make_grid, sample
from .spreading import bump_initial, envelope_check, estimate_speed, track_front
from .wave import aligned_sup_diff, construct_wave, decay_ratio, \
    default_wave_stepper, stationary_residual

SUITES = ("elliptic", "constants", "envelopes", "dynamics", "wave",
          "spreading", "determinism")


@dataclass
class CheckResult:
    cid: str
    suite: str
    title: str
    passed: bool
    detail: str
    elapsed: float


class VerifyContext:
    """Lazy, lock-protected cache of the expensive shared runs."""

    def __init__(self, seed: int = 20240801):
        self.seed = seed
        self._cache: dict = {}
        self._lock = threading.RLock()
        self.build_times: dict = {}

    def _get(self, key: str, builder):
        with self._lock:
            if key not in self._cache:
                t0 = time.perf_counter()
                self._cache[key] = builder()
                self.build_times[key] = time.perf_counter() - t0
            return self._cache[key]

    # -- shared artifacts -------------------------------------------------
    def wave_chi02(self):
        return self._get("wave_chi02", lambda: construct_wave(
            0.2, c_star(ModelParams(chi=0.2))))

    def wave_fisher(self):
        return self._get("wave_fisher", lambda: construct_wave(0.0, 2.0))

    def wave_chi001(self):
        return self._get("wave_chi001", lambda: construct_wave(
            0.01, c_star(ModelParams(chi=0.01))))

    def _spread(self, chi: float):
        def build():
            params = ModelParams(chi=chi)
            upper = speed_interval(params).upper
            L = upper * 40.0 + 20.0
            grid = make_grid(L, int(round(2 * L / 0.01)))
            u0 = bump_initial(grid, 2.0, 1.0)
            cfg = StepperConfig(dt_max=0.01, cfl_advection=0.5, scheme="imex_be")
            return run_lab(u0, params, cfg, 40.0, 0.5, support_radius=2.0)
        return self._get(f"spread_{chi:g}", build)

    def spread_chi0(self):
        return self._spread(0.0)

    def spread_chi02(self):
        return self._spread(0.2)


# -- criterion implementations --------------------------------------------

def _ac01_elliptic_oracle(ctx: VerifyContext) -> tuple[bool, str]:
    t0 = time.perf_counter()
    grid = make_grid(60.0, 12000)
    mu = 0.5
    u = sample(grid, lambda x: np.exp(-mu * x))
    exact = u.values / (1.0 - mu * mu)
    vk = solve_v(u, "green_kernel").values
    vt = solve_v(u, "tridiagonal").values
    mask = np.abs(grid.x) <= 40.0
    rel = float(np.max(np.abs(vk - exact)[mask] / exact[mask]))
    agree = float(np.max(np.abs(vk - vt)[mask] / exact[mask]))
    elapsed = time.perf_counter() - t0
    ok = rel <= 1e-4 and agree <= 1e-4 and elapsed < 1.0
    return ok, (f"kernel rel err {rel:.3e} (<=1e-4), backend agreement "
                f"{agree:.3e} (<=1e-4), {elapsed:.3f}s (<1s)")


def _ac02_kernel_identity(ctx: VerifyContext) -> tuple[bool, str]:
    dev = kernel_identity_check([0.0, 0.5, 1.0, 2.0, 5.0])
    return dev <= 1e-8, f"max kernel-identity deviation {dev:.3e} (<=1e-8)"


def _ac03_sup_bounds(ctx: VerifyContext) -> tuple[bool, str]:
    rng = np.random.default_rng(ctx.seed)
    grid = make_grid(30.0, 3000)
    worst_v = worst_vp = -math.inf
    for _ in range(100):
        u = Field(grid, rng.uniform(0.0, 1.0, grid.n + 1))
        sup_u = float(np.max(u.values))
        v, vp = solve_v_pair(u)
        worst_v = max(worst_v, float(np.max(np.abs(v.values))) - sup_u)
        worst_vp = max(worst_vp, float(np.max(np.abs(vp.values))) - sup_u)
    ok = worst_v <= 1e-8 and worst_vp <= 1e-8
    return ok, (f"max(||v||-||u||) = {worst_v:.3e}, max(||v_x||-||u||) = "
                f"{worst_vp:.3e} (both <=1e-8 slack)")


def _ac04_constants(ctx: VerifyContext) -> tuple[bool, str]:
    t0 = time.perf_counter()
    problems = []
    for k in range(1, 20):
        chi = 0.05 * k
        m = mu_star(ModelParams(chi=chi))
        res = abs(decay_speed_trade_off(m) - (1.0 - chi) / chi)
        if res > 1e-12:
            problems.append(f"residual {res:.2e} at chi={chi:.2f}")
        if not c_mu(m) > 2.0:
            problems.append(f"c_star <= 2 at chi={chi:.2f}")
    if not c_star(ModelParams(chi=0.001)) < 2.001:
        problems.append("c_star(0.001) >= 2.001")

    def oracle(chi):
        target = (1.0 - chi) / chi
        return brentq(lambda m: decay_speed_trade_off(m) - target,
                      1e-9, 1.0 - 1e-9, xtol=1e-15, rtol=8.9e-16)

    m_half = mu_star(ModelParams(chi=0.5))
    if abs(m_half - oracle(0.5)) > 1e-10 or abs(m_half - 0.5257) > 5e-4:
        problems.append(f"mu_star(0.5) = {m_half:.6f} off oracle/0.5257")
    cs02 = c_star(ModelParams(chi=0.2))
    cs02_oracle = oracle(0.2)
    cs02_oracle = cs02_oracle + 1.0 / cs02_oracle
    if abs(cs02 - cs02_oracle) > 1e-10 or abs(cs02 - 2.030) > 5e-3:
        problems.append(f"c_star(0.2) = {cs02:.6f} off oracle/2.030")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        problems.append(f"runtime {elapsed:.2f}s >= 1s")
    if problems:
        return False, "; ".join(problems)
    return True, (f"19 residuals <=1e-12, c_star>2, mu_star(0.5)={m_half:.5f}, "
                  f"c_star(0.2)={cs02:.5f}, {elapsed:.3f}s")


def _ac05_envelope_signs(ctx: VerifyContext) -> tuple[bool, str]:
    grid = make_grid(60.0, 12000)
    h = grid.h
    cases = [(0.2, 0.5), (0.2, mu_star(ModelParams(chi=0.2))),
             (0.45, mu_star(ModelParams(chi=0.45)))]
    worst = {"phi": -math.inf, "cap": -math.inf, "lower": math.inf}
    from .envelopes import eval_phi, eval_u_minus, eval_u_plus
    for chi, mu in cases:
        p = make_envelope(chi, mu)
        cap = 1.0 / (1.0 - chi)
        u_minus = sample(grid, lambda x: eval_u_minus(p, x))
        u_plus = sample(grid, lambda x: eval_u_plus(p, x))
        u_mid = Field(grid, 0.5 * (u_minus.values + u_plus.values))
        phi = sample(grid, lambda x: eval_phi(mu, x))
        capf = Field(grid, np.full(grid.n + 1, cap))
        tail = grid.x > p.a_lower + 10.0 * h
        for u in (u_minus, u_plus, u_mid):
            r_phi = residual_operator_L(p, phi, u).values[1:-1]
            worst["phi"] = max(worst["phi"], float(np.max(r_phi)))
            r_cap = residual_operator_L(p, capf, u).values[1:-1]
            worst["cap"] = max(worst["cap"], float(np.max(r_cap)))
            r_low = residual_operator_L(p, u_minus, u).values
            sel = tail[1:-1]
            if np.any(sel):
                worst["lower"] = min(worst["lower"], float(np.min(r_low[1:-1][sel])))
    ok = worst["phi"] <= 1e-4 and worst["cap"] <= 1e-4 and worst["lower"] >= -1e-4
    return ok, (f"max L(phi) {worst['phi']:.3e} (<=1e-4), max L(cap) "
                f"{worst['cap']:.3e} (<=1e-4), min L(lower) past the support "
                f"edge {worst['lower']:.3e} (>=-1e-4)")


def _ac06_inner_monotone(ctx: VerifyContext) -> tuple[bool, str]:
    chi, c = 0.2, 2.5
    mu = 0.5  # root of mu + 1/mu = 2.5
    p = make_envelope(chi, mu)
    grid = make_grid(60.0, 12000)
    from .envelopes import eval_u_plus
    u_frozen = sample(grid, lambda x: eval_u_plus(p, x))
    cfg = default_wave_stepper(mu, grid.half_length)
    # monotone decay and the envelope sandwich are enforced inside; a
    # violation raises and fails the criterion
    res = evolve_frozen_to_steady(u_frozen, p, cfg, tol_inner=1e-8, t_cap=200.0)
    member = membership_E_mu(p, res.field, tol=1e-6)
    ok = res.converged and member.member
    return ok, (f"converged={res.converged} at t={res.t_final:.1f} "
                f"(last diff {res.last_diff:.2e}), final state in the envelope "
                f"set: {member.member} (worst {member.worst_violation:.2e})")


def _ac07_wave(ctx: VerifyContext) -> tuple[bool, str]:
    prof = ctx.wave_chi02()
    elapsed = ctx.build_times["wave_chi02"]
    resid = stationary_residual(prof)
    ratio = decay_ratio(prof, (10.0, 25.0))
    plateau = abs(float(interp(prof.U, -55.0)) - 1.0)
    problems = []
    if not prof.converged:
        problems.append(f"outer not converged (diff {prof.final_outer_diff:.2e})")
    if prof.outer_iterations > 50:
        problems.append(f"{prof.outer_iterations} outer iterations > 50")
    if resid > 1e-3:
        problems.append(f"stationary residual {resid:.2e} > 1e-3")
    if ratio.max_abs_deviation > 0.02:
        problems.append(f"decay ratio dev {ratio.max_abs_deviation:.3f} > 0.02")
    if plateau > 0.03:
        problems.append(f"|U(-55)-1| = {plateau:.3f} > 0.03")
    if elapsed > 120.0:
        problems.append(f"runtime {elapsed:.0f}s > 120s")
    if problems:
        return False, "; ".join(problems)
    return True, (f"converged in {prof.outer_iterations} outer iterations, "
                  f"residual {resid:.2e}, ratio dev {ratio.max_abs_deviation:.4f}, "
                  f"|U(-55)-1| = {plateau:.4f}, {elapsed:.0f}s")


def _ac08_fisher_control(ctx: VerifyContext) -> tuple[bool, str]:
    w0 = ctx.wave_fisher()
    w1 = ctx.wave_chi001()
    diff = aligned_sup_diff(w0.U, w1.U)
    increase = float(np.max(np.diff(w0.U.values)))
    plateau = abs(float(interp(w0.U, -55.0)) - 1.0)
    ok = diff <= 0.05 and increase <= 1e-6 and plateau <= 0.03
    return ok, (f"aligned sup diff chi=0 vs chi=0.01: {diff:.4f} (<=0.05); "
                f"chi=0 profile monotone within {increase:.1e}, "
                f"plateau error {plateau:.4f}")


def _fit_speeds(record, thetas, t_final=40.0):
    speeds = {}
    for theta in thetas:
        trace = track_front(record, theta, "right")
        c_hat, stderr = estimate_speed(trace, (0.5 * t_final, t_final))
        speeds[theta] = (c_hat, stderr)
    return speeds


def _ac09_spreading_fisher(ctx: VerifyContext) -> tuple[bool, str]:
    rec = ctx.spread_chi0()
    elapsed = ctx.build_times["spread_0"]
    speeds = _fit_speeds(rec, (0.01, 0.1, 0.5))
    bad = [f"theta={th}: {c:.3f}" for th, (c, _) in speeds.items()
           if not (1.9 <= c <= 2.05)]
    if bad:
        return False, "speeds outside [1.9, 2.05]: " + ", ".join(bad)
    if elapsed > 180.0:
        return False, f"runtime {elapsed:.0f}s > 180s"
    txt = ", ".join(f"theta={th}: {c:.4f}+-{se:.4f}" for th, (c, se) in speeds.items())
    return True, f"fitted speeds in [1.9, 2.05]: {txt}; {elapsed:.0f}s"


def _ac10_spreading_chi02(ctx: VerifyContext) -> tuple[bool, str]:
    rec = ctx.spread_chi02()
    elapsed = ctx.build_times["spread_0.2"]
    speeds = _fit_speeds(rec, (0.01, 0.1, 0.5))
    problems = [f"theta={th}: {c:.3f}" for th, (c, _) in speeds.items()
                if not (1.38 <= c <= 2.13)]
    if problems:
        return False, "speeds outside [1.38, 2.13]: " + ", ".join(problems)
    t_idx = rec.times.index(40.0)
    u40 = rec.u_snapshots[t_idx].values
    x = rec.grid.x
    behind = float(np.max(np.abs(u40[np.abs(x) <= 40.0] - 1.0)))
    ahead = float(np.max(u40[np.abs(x) >= 100.0]))
    if behind > 0.05:
        return False, f"behind-front sup|u-1| = {behind:.3f} > 0.05"
    if ahead > 1e-3:
        return False, f"ahead-front sup u = {ahead:.2e} > 1e-3"
    if elapsed > 180.0:
        return False, f"runtime {elapsed:.0f}s > 180s"
    txt = ", ".join(f"theta={th}: {c:.4f}" for th, (c, _) in speeds.items())
    return True, (f"speeds in [1.38, 2.13] ({txt}); behind-front {behind:.4f} "
                  f"(<=0.05), ahead-front {ahead:.2e} (<=1e-3); {elapsed:.0f}s")


def _ac11_envelope_containment(ctx: VerifyContext) -> tuple[bool, str]:
    rec = ctx.spread_chi02()
    rep = envelope_check(rec, ModelParams(chi=0.2))
    ok = rep.passed and rep.logistic_cap_excess <= 1e-6
    return ok, (f"max envelope violation {rep.max_violation:.3e} vs allowance "
                f"{1e-6 * rep.M:.3e} (M={rep.M:.3f}); logistic cap excess "
                f"{rep.logistic_cap_excess:.3e} (<=1e-6)")


def _ac12_logistic_equivalence(ctx: VerifyContext) -> tuple[bool, str]:
    worst = -math.inf
    for chi in (0.1, 0.3):
        grid = make_grid(40.0, 800)
        params = ModelParams(chi=chi)
        cfg = StepperConfig(dt_max=1e-3, scheme="imex_cn")
        u0 = Field(grid, np.full(grid.n + 1, 0.5))
        rec = run_lab(u0, params, cfg, 10.0, 0.5, right_tail="constant")
        for t, u in zip(rec.times, rec.u_snapshots):
            # constant state: chi*v - chi*u cancels, leaving w' = w(1 - w)
            exact = logistic_exact(t, 0.5, 0.0)
            worst = max(worst, float(np.max(np.abs(u.values - exact))))
    return worst <= 1e-6, f"max |u - logistic| over both chi = {worst:.3e} (<=1e-6)"


def _ac13_stability(ctx: VerifyContext) -> tuple[bool, str]:
    grid = make_grid(30.0, 6000)
    L = grid.half_length
    params = ModelParams(chi=0.3)
    cfg = StepperConfig(dt_max=0.02, scheme="imex_be")
    u0 = Field(grid, 1.0 + 0.2 * np.cos(np.pi * grid.x / L))
    rec = run_lab(u0, params, cfg, 50.0, 5.0, right_tail="constant")
    dev = float(np.max(np.abs(rec.u_snapshots[-1].values - 1.0)))
    return dev < 0.01, f"sup|u(.,50) - 1| = {dev:.4f} (<0.01)"


def _ac14_determinism(ctx: VerifyContext) -> tuple[bool, str]:
    from .artifacts import constants_command, spread_command
    base_const = RunConfig(command="constants", chi=0.2, seed=ctx.seed)
    base_spread = RunConfig(command="spread", chi=0.3, half_length=30.0, n=600,
                            t_final=4.0, snapshot_dt=0.5, thresholds=(0.1, 0.5),
                            seed=ctx.seed)
    with tempfile.TemporaryDirectory() as d1, tempfile.TemporaryDirectory() as d2:
        for d in (d1, d2):
            constants_command(replace(base_const, directory=d))
            spread_command(replace(base_spread, directory=d))
        names = sorted(os.listdir(d1))
        if names != sorted(os.listdir(d2)):
            return False, "artifact file lists differ between runs"
        _, mismatch, errs = filecmp.cmpfiles(d1, d2, names, shallow=False)
        if mismatch or errs:
            return False, f"non-identical artifacts: {mismatch + errs}"
        return True, f"{len(names)} artifacts byte-identical across repeated runs"


@dataclass(frozen=True)
class Criterion:
    cid: str
    suite: str
    title: str
    fn: object


CRITERIA = (
    Criterion("AC01", "elliptic", "elliptic oracle: v of exp(-x/2) and backend agreement", _ac01_elliptic_oracle),
    Criterion("AC02", "elliptic", "time-integrated heat kernel equals exp(-|x|)/2", _ac02_kernel_identity),
    Criterion("AC03", "elliptic", "sup bounds ||v||,||v_x|| <= ||u|| on random fields", _ac03_sup_bounds),
    Criterion("AC04", "constants", "critical decay rates and speeds vs bisection oracle", _ac04_constants),
    Criterion("AC05", "envelopes", "super/sub-solution residual sign checks", _ac05_envelope_signs),
    Criterion("AC06", "dynamics", "inner limit: monotone decay into the envelope set", _ac06_inner_monotone),
    Criterion("AC07", "wave", "traveling wave at chi=0.2, c=c_star", _ac07_wave),
    Criterion("AC08", "wave", "Fisher control and chi->0 consistency", _ac08_fisher_control),
    Criterion("AC09", "spreading", "spreading speed at chi=0 (Fisher speed 2)", _ac09_spreading_fisher),
    Criterion("AC10", "spreading", "spreading at chi=0.2: interval, behind/ahead fronts", _ac10_spreading_chi02),
    Criterion("AC11", "spreading", "exponential envelope and logistic cap containment", _ac11_envelope_containment),
    Criterion("AC12", "dynamics", "homogeneous states follow the exact logistic flow", _ac12_logistic_equivalence),
    Criterion("AC13", "dynamics", "stability of the (1,1) state under positive perturbation", _ac13_stability),
    Criterion("AC14", "determinism", "repeated runs produce byte-identical artifacts", _ac14_determinism),
)


def run_criterion(ctx: VerifyContext, criterion: Criterion) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, detail = criterion.fn(ctx)
    except Exception as exc:  # noqa: BLE001 - a crash is a failed criterion
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(cid=criterion.cid, suite=criterion.suite,
                       title=criterion.title, passed=passed, detail=detail,
                       elapsed=time.perf_counter() - t0)


def run_suite(ctx: VerifyContext, suite: str = "all",
              max_threads: int | None = None) -> list[CheckResult]:
    """Run the selected criteria; CHEMOWAVE_THREADS caps suite parallelism."""
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {('all',) + SUITES}")
    chosen = [c for c in CRITERIA if suite in ("all", c.suite)]
    if max_threads is None:
        max_threads = int(os.environ.get("CHEMOWAVE_THREADS", "1"))
    if max_threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_threads) as pool:
            results = list(pool.map(lambda c: run_criterion(ctx, c), chosen))
    else:
        results = [run_criterion(ctx, c) for c in chosen]
    return sorted(results, key=lambda r: r.cid)
