"""Calibration policies: open-loop schedules and feedback controllers.

Open-loop schedules fire on the wall-clock timeline at multiples of a
nominal no-calibration iteration period, blind to device state, and recover
at full scheduled strength. The feedback controllers observe (age, gap,
remaining budget): the greedy controller compares the one-step gap cost of
each action, the rollout controller simulates each candidate followed by
no-calibration continuation steps and minimizes the lookahead gap integral.
Greedy and a rollout with horizon 1 are separate code paths that must make
identical decisions.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import _kernels
from .calibration import LatencyRegime, PrimitiveSet, form_code, realized_recovery
from .drift import DriftModel
from .errors import DomainError

_ACTION_NAMES = ("none", "light", "heavy")

OPEN_LOOP_KINDS = ("no_cal", "periodic_heavy", "fixed_light")
FEEDBACK_KINDS = ("greedy", "rollout")

_POLICY_CODES = {
    "no_cal": _kernels.POLICY_NO_CAL,
    "periodic_heavy": _kernels.POLICY_PERIODIC_HEAVY,
    "fixed_light": _kernels.POLICY_FIXED_LIGHT,
    "greedy": _kernels.POLICY_GREEDY,
    "rollout": _kernels.POLICY_ROLLOUT,
}


@dataclass(frozen=True)
class Policy:
    kind: str
    period: int | None = None
    horizon: int | None = None
    common_horizon: bool = False

    def __post_init__(self):
        if self.kind not in _POLICY_CODES:
            raise DomainError(
                f"unknown policy kind {self.kind!r}; expected one of "
                f"{tuple(_POLICY_CODES)}"
            )
        if self.kind in ("periodic_heavy", "fixed_light"):
            if self.period is None or self.period < 1:
                raise DomainError(f"{self.kind} needs period >= 1, got {self.period}")
        if self.kind == "rollout":
            if self.horizon is None or self.horizon < 1:
                raise DomainError(f"rollout needs horizon >= 1, got {self.horizon}")

    @classmethod
    def no_cal(cls) -> "Policy":
        return cls("no_cal")

    @classmethod
    def periodic_heavy(cls, period: int) -> "Policy":
        return cls("periodic_heavy", period=period)

    @classmethod
    def fixed_light(cls, period: int) -> "Policy":
        return cls("fixed_light", period=period)

    @classmethod
    def greedy(cls) -> "Policy":
        return cls("greedy")

    @classmethod
    def rollout(cls, horizon: int, common_horizon: bool = False) -> "Policy":
        return cls("rollout", horizon=horizon, common_horizon=common_horizon)

    @property
    def code(self) -> int:
        return _POLICY_CODES[self.kind]

    @property
    def is_open_loop(self) -> bool:
        return self.kind in OPEN_LOOP_KINDS

    @property
    def label(self) -> str:
        if self.kind in ("periodic_heavy", "fixed_light"):
            return f"{self.kind}_{self.period}"
        if self.kind == "rollout":
            return f"rollout_{self.horizon}"
        return self.kind


@dataclass(frozen=True)
class Observation:
    """What a feedback controller sees at a decision point."""

    age: float
    gap: float
    remaining: float

    def __post_init__(self):
        if self.age < 0.0 or self.gap < 0.0 or self.remaining < 0.0:
            raise DomainError("observation fields must be non-negative")


@dataclass(frozen=True)
class RolloutConfig:
    """Lookahead settings; feedback recoveries always run in runtime mode."""

    horizon: int = 6
    form: str = "rational"
    common_horizon: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        form_code(self.form)


def scheduled_decision(policy, obs, workload, fires_so_far: int = 0) -> str:
    """Action of an open-loop schedule at this decision point.

    A function of elapsed wall-clock time and the fire count only; the
    observation's age and gap never influence the outcome. Fires at most
    once per decision. Feasibility against the remaining budget is enforced
    by the engine, which downgrades an unfittable fire to no action without
    consuming it.
    """
    if policy.kind not in OPEN_LOOP_KINDS:
        raise DomainError(f"{policy.kind!r} is not an open-loop policy")
    if policy.kind == "no_cal":
        return "none"
    elapsed = workload.t_budget - obs.remaining
    period_s = policy.period * workload.t_base
    threshold = (fires_so_far + 1.0) * period_s
    if elapsed >= threshold - _kernels.FEAS_EPS:
        return "heavy" if policy.kind == "periodic_heavy" else "light"
    return "none"


def _runtime_scalars(primitives, regime, form):
    light = primitives.light
    heavy = primitives.heavy
    dur_light = _kernels.cal_duration(light.base_time, light.rounds, regime.tau_rtt)
    dur_heavy = _kernels.cal_duration(heavy.base_time, heavy.rounds, regime.tau_rtt)
    rt_eta_light = realized_recovery(light, regime, "runtime", form)
    rt_eta_heavy = realized_recovery(heavy, regime, "runtime", form)
    return dur_light, dur_heavy, rt_eta_light, rt_eta_heavy


def greedy_decision(
    obs: Observation,
    workload,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regime: LatencyRegime,
    form: str = "rational",
) -> str:
    """One-step cost comparison; ties prefer none over light over heavy."""
    dur_light, dur_heavy, rt_eta_light, rt_eta_heavy = _runtime_scalars(
        primitives, regime, form
    )
    action = _kernels.greedy_action(
        obs.age, obs.gap, obs.remaining, workload.t_base,
        rt_eta_light, rt_eta_heavy, dur_light, dur_heavy,
        primitives.light.target, primitives.heavy.target,
        drift.tau_drift, drift.nu,
        workload.progress.alpha, workload.progress.lam,
        workload.rho, workload.r_max, workload.g_min,
    )
    return _ACTION_NAMES[action]


def rollout_decision(
    cfg: RolloutConfig,
    obs: Observation,
    workload,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regime: LatencyRegime,
) -> str:
    """First action of the best candidate lookahead sequence.

    Candidates whose first step does not fit in the remaining budget are
    excluded; when nothing fits the answer is no action.
    """
    if not obs.remaining > 0.0:
        raise DomainError("rollout needs remaining budget > 0")
    dur_light, dur_heavy, rt_eta_light, rt_eta_heavy = _runtime_scalars(
        primitives, regime, cfg.form
    )
    action = _kernels.rollout_action(
        obs.age, obs.gap, obs.remaining, cfg.horizon, cfg.common_horizon,
        workload.t_base, rt_eta_light, rt_eta_heavy, dur_light, dur_heavy,
        primitives.light.target, primitives.heavy.target,
        drift.tau_drift, drift.nu,
        workload.progress.alpha, workload.progress.lam,
        workload.rho, workload.r_max, workload.g_min,
    )
    return _ACTION_NAMES[action]


def _run_cell(task):
    from . import sim

    workload, drift, primitives, regime, policy, a0, form, g0 = task
    return sim.run(workload, drift, primitives, regime, policy, a0, form, g0)


def evaluate_policy_grid(
    policies,
    alpha_grid,
    a0_grid,
    workload,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regime: LatencyRegime,
    form: str = "rational",
    g0: float = 1.0,
    n_workers: int = 1,
):
    """Run every policy over an (alpha, a0) grid.

    Returns {policy label: matrix}, each matrix indexed [i_alpha][j_a0].
    Cells are independent; with ``n_workers`` > 1 they are evaluated in a
    process pool and merged in row-major order, so the output is identical
    to a single-worker evaluation.
    """
    from dataclasses import replace

    if len(alpha_grid) == 0 or len(a0_grid) == 0:
        raise DomainError("grids must be non-empty")
    tasks = []
    for policy in policies:
        for alpha in alpha_grid:
            for a0 in a0_grid:
                w = replace(
                    workload, progress=replace(workload.progress, alpha=float(alpha))
                )
                tasks.append((w, drift, primitives, regime, policy, float(a0), form, g0))

    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            flat = list(pool.map(_run_cell, tasks, chunksize=8))
    else:
        flat = [_run_cell(t) for t in tasks]

    n_a, n_0 = len(alpha_grid), len(a0_grid)
    out = {}
    idx = 0
    for policy in policies:
        matrix = []
        for _ in range(n_a):
            matrix.append(flat[idx : idx + n_0])
            idx += n_0
        out[policy.label] = matrix
    return out
