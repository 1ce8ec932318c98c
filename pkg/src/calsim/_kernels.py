"""Scalar hot-path kernels for the wall-clock simulation loop.

Everything in this module operates on plain floats, ints, and preallocated
numpy arrays so the entire stepping loop (including the lookahead inside the
feedback controllers) compiles under numba. The backend is picked once at
import time:

  CALSIM_NUMBA=auto   use numba if importable, else pure Python (default)
  CALSIM_NUMBA=0      force the pure-Python fallback
  CALSIM_NUMBA=1      require numba; raise if it is missing

The fallback runs the identical source, so both backends share one set of
semantics. ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

ACTION_NONE = 0
ACTION_LIGHT = 1
ACTION_HEAVY = 2

FORM_RATIONAL = 0
FORM_EXPONENTIAL = 1
FORM_LINEAR_CUTOFF = 2

POLICY_NO_CAL = 0
POLICY_PERIODIC_HEAVY = 1
POLICY_FIXED_LIGHT = 2
POLICY_GREEDY = 3
POLICY_ROLLOUT = 4

# Floor keeps the linear-cutoff realizability inside (0, 1].
LINEAR_CUTOFF_FLOOR = 1e-6

# Tolerance (seconds) for "does this step still fit in the remaining budget".
FEAS_EPS = 1e-9


def _resolve_backend() -> bool:
    flag = os.environ.get("CALSIM_NUMBA", "auto").strip().lower()
    if flag in ("0", "false", "off", "python"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in ("1", "true", "on", "numba"):
            raise RuntimeError(
                "CALSIM_NUMBA=%s requires numba, but it is not importable" % flag
            )
        return False
    return True


NUMBA_ENABLED = _resolve_backend()

if NUMBA_ENABLED:
    from numba import njit

    def _kernel(func):
        return njit(cache=True)(func)

else:

    def _kernel(func):
        return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "python"


@_kernel
def freshness_of_age(age, tau_drift, nu):
    # 1 / (1 + (age/tau)^nu); equals 1 at age 0, 0.5 at age == tau_drift.
    return 1.0 / (1.0 + (age / tau_drift) ** nu)


@_kernel
def age_of_freshness(l2, tau_drift, nu):
    # Exact inverse of freshness_of_age on (0, 1]. (1 - l2)/l2 is the
    # well-conditioned form of 1/l2 - 1: the subtraction is exact for
    # l2 >= 0.5, so the only error left is the representation of l2 itself.
    return tau_drift * ((1.0 - l2) / l2) ** (1.0 / nu)


@_kernel
def progress_factor(l2, alpha, lam):
    # Blend of a tolerant sqrt branch and a sensitivity-penalized power branch.
    return (1.0 - alpha) * math.sqrt(l2) + alpha * l2 ** lam


@_kernel
def realizability(form, tau, tau_tol):
    if form == FORM_RATIONAL:
        return 1.0 / (1.0 + tau / tau_tol)
    if form == FORM_EXPONENTIAL:
        return math.exp(-tau / tau_tol)
    v = 1.0 - tau / (2.0 * tau_tol)
    if v < LINEAR_CUTOFF_FLOOR:
        return LINEAR_CUTOFF_FLOOR
    return v


@_kernel
def cal_duration(t0, n_rounds, tau_rtt):
    return t0 + n_rounds * tau_rtt


@_kernel
def recovered_age(age, cal_time, eta, target, tau_drift, nu):
    """Age after one recovery action that itself takes ``cal_time`` seconds.

    The device keeps drifting during the action; recovery then closes a
    fraction ``eta`` of the remaining distance to ``target`` freshness. A
    device already at or above the target only pays the drift.
    """
    a_mid = age + cal_time
    l2_mid = freshness_of_age(a_mid, tau_drift, nu)
    lift = target - l2_mid
    if lift <= 0.0 or eta <= 0.0:
        return a_mid
    l2_new = l2_mid + eta * lift
    if l2_new >= 1.0:
        return 0.0
    return age_of_freshness(l2_new, tau_drift, nu)


@_kernel
def gap_after_step(gap, l2_end, alpha, lam, rho, r_max, g_min):
    r = rho * progress_factor(l2_end, alpha, lam)
    if r < 0.0:
        r = 0.0
    elif r > r_max:
        r = r_max
    return g_min + (gap - g_min) * (1.0 - r)


@_kernel
def apply_action(
    age,
    action,
    eta_light,
    eta_heavy,
    dur_light,
    dur_heavy,
    tar_light,
    tar_heavy,
    tau_drift,
    nu,
    t_base,
):
    """One full iteration: optional recovery, then the base workload step.

    Returns (end-of-step age, step duration). Shared by the engine and both
    feedback controllers so their float arithmetic is bit-identical.
    """
    if action == ACTION_LIGHT:
        age = recovered_age(age, dur_light, eta_light, tar_light, tau_drift, nu)
        step = t_base + dur_light
    elif action == ACTION_HEAVY:
        age = recovered_age(age, dur_heavy, eta_heavy, tar_heavy, tau_drift, nu)
        step = t_base + dur_heavy
    else:
        step = t_base
    return age + t_base, step


@_kernel
def greedy_action(
    age,
    gap,
    remaining,
    t_base,
    rt_eta_light,
    rt_eta_heavy,
    dur_light,
    dur_heavy,
    tar_light,
    tar_heavy,
    tau_drift,
    nu,
    alpha,
    lam,
    rho,
    r_max,
    g_min,
):
    """One-step cost comparison; ties resolve none < light < heavy."""
    best = ACTION_NONE
    best_cost = np.inf
    for action in range(3):
        if action == ACTION_LIGHT:
            d1 = t_base + dur_light
        elif action == ACTION_HEAVY:
            d1 = t_base + dur_heavy
        else:
            d1 = t_base
        if d1 > remaining + FEAS_EPS:
            continue
        a_end, step = apply_action(
            age, action, rt_eta_light, rt_eta_heavy, dur_light, dur_heavy,
            tar_light, tar_heavy, tau_drift, nu, t_base,
        )
        l2_end = freshness_of_age(a_end, tau_drift, nu)
        g_new = gap_after_step(gap, l2_end, alpha, lam, rho, r_max, g_min)
        cost = 0.5 * (gap + g_new) * step
        if cost < best_cost:
            best_cost = cost
            best = action
    return best


@_kernel
def rollout_action(
    age,
    gap,
    remaining,
    horizon,
    common_horizon,
    t_base,
    rt_eta_light,
    rt_eta_heavy,
    dur_light,
    dur_heavy,
    tar_light,
    tar_heavy,
    tau_drift,
    nu,
    alpha,
    lam,
    rho,
    r_max,
    g_min,
):
    """Pick the first action minimizing the lookahead gap integral.

    Each candidate runs [candidate, none, ..., none] (horizon steps total)
    through the exact engine transition. By default a candidate is integrated
    over min(remaining, its own sequence duration); with ``common_horizon``
    all candidates share the longest feasible window, holding the final gap
    constant past their own sequence end. Candidates whose first step does
    not fit are excluded; ties resolve none < light < heavy.
    """
    w_common = -1.0
    if common_horizon:
        w_common = 0.0
        for action in range(3):
            if action == ACTION_LIGHT:
                d1 = t_base + dur_light
            elif action == ACTION_HEAVY:
                d1 = t_base + dur_heavy
            else:
                d1 = t_base
            if d1 <= remaining + FEAS_EPS:
                t_h = d1 + (horizon - 1) * t_base
                if t_h > w_common:
                    w_common = t_h
        if w_common > remaining:
            w_common = remaining

    best = ACTION_NONE
    best_cost = np.inf
    for action in range(3):
        if action == ACTION_LIGHT:
            d1 = t_base + dur_light
        elif action == ACTION_HEAVY:
            d1 = t_base + dur_heavy
        else:
            d1 = t_base
        if d1 > remaining + FEAS_EPS:
            continue
        if common_horizon:
            window = w_common
        else:
            window = d1 + (horizon - 1) * t_base
            if window > remaining:
                window = remaining
        a = age
        g = gap
        cost = 0.0
        s = 0.0
        for k in range(horizon):
            d = d1 if k == 0 else t_base
            if s + d <= window + FEAS_EPS:
                step_action = action if k == 0 else ACTION_NONE
                a, step = apply_action(
                    a, step_action, rt_eta_light, rt_eta_heavy, dur_light,
                    dur_heavy, tar_light, tar_heavy, tau_drift, nu, t_base,
                )
                l2_end = freshness_of_age(a, tau_drift, nu)
                g_new = gap_after_step(g, l2_end, alpha, lam, rho, r_max, g_min)
                cost += 0.5 * (g + g_new) * d
                g = g_new
                s += d
            else:
                cost += g * (window - s)
                s = window
                break
        if s < window - FEAS_EPS:
            cost += g * (window - s)
        if cost < best_cost:
            best_cost = cost
            best = action
    return best


@_kernel
def run_sim(
    a0,
    g0,
    t_budget,
    t_base,
    tau_drift,
    nu,
    alpha,
    lam,
    rho,
    r_max,
    g_min,
    dur_light,
    dur_heavy,
    sch_eta_light,
    sch_eta_heavy,
    rt_eta_light,
    rt_eta_heavy,
    tar_light,
    tar_heavy,
    policy_code,
    period_k,
    horizon,
    common_horizon,
    t_arr,
    age_arr,
    l2_arr,
    gap_arr,
    act_arr,
    step_arr,
):
    """Drive one run to budget exhaustion, filling the trace arrays.

    Record 0 is the initial state at t = 0; every later record is one
    executed iteration sampled at end of step. When not even a bare
    iteration fits, the final gap is held constant over the leftover time.

    Returns (n_records, gap_area, residual, action_count, heavy_count).
    """
    age = a0
    gap = g0
    elapsed = 0.0
    area = 0.0
    fires = 0
    action_count = 0
    heavy_count = 0
    period_s = period_k * t_base

    t_arr[0] = 0.0
    age_arr[0] = age
    l2_arr[0] = freshness_of_age(age, tau_drift, nu)
    gap_arr[0] = gap
    act_arr[0] = ACTION_NONE
    step_arr[0] = 0.0
    n = 1

    while True:
        remaining = t_budget - elapsed
        if t_base > remaining + FEAS_EPS:
            if remaining > 0.0:
                area += gap * remaining
            break

        if policy_code == POLICY_NO_CAL:
            action = ACTION_NONE
        elif policy_code == POLICY_PERIODIC_HEAVY or policy_code == POLICY_FIXED_LIGHT:
            action = ACTION_NONE
            threshold = (fires + 1.0) * period_s
            if elapsed >= threshold - FEAS_EPS:
                if policy_code == POLICY_PERIODIC_HEAVY:
                    want = ACTION_HEAVY
                    d_want = t_base + dur_heavy
                else:
                    want = ACTION_LIGHT
                    d_want = t_base + dur_light
                if d_want <= remaining + FEAS_EPS:
                    action = want
                    fires += 1
        elif policy_code == POLICY_GREEDY:
            action = greedy_action(
                age, gap, remaining, t_base, rt_eta_light, rt_eta_heavy,
                dur_light, dur_heavy, tar_light, tar_heavy, tau_drift, nu,
                alpha, lam, rho, r_max, g_min,
            )
        else:
            action = rollout_action(
                age, gap, remaining, horizon, common_horizon, t_base,
                rt_eta_light, rt_eta_heavy, dur_light, dur_heavy, tar_light,
                tar_heavy, tau_drift, nu, alpha, lam, rho, r_max, g_min,
            )

        # Open-loop schedules run at full strength; feedback actions pay the
        # latency-limited factor.
        if policy_code <= POLICY_FIXED_LIGHT:
            eta_light = sch_eta_light
            eta_heavy = sch_eta_heavy
        else:
            eta_light = rt_eta_light
            eta_heavy = rt_eta_heavy

        age, step = apply_action(
            age, action, eta_light, eta_heavy, dur_light, dur_heavy,
            tar_light, tar_heavy, tau_drift, nu, t_base,
        )
        l2_end = freshness_of_age(age, tau_drift, nu)
        g_new = gap_after_step(gap, l2_end, alpha, lam, rho, r_max, g_min)
        area += 0.5 * (gap + g_new) * step
        gap = g_new
        elapsed += step

        t_arr[n] = elapsed
        age_arr[n] = age
        l2_arr[n] = l2_end
        gap_arr[n] = gap
        act_arr[n] = action
        step_arr[n] = step
        n += 1

        if action != ACTION_NONE:
            action_count += 1
            if action == ACTION_HEAVY:
                heavy_count += 1

    residual = t_budget - elapsed
    if residual < 0.0:
        residual = 0.0
    return n, area, residual, action_count, heavy_count
