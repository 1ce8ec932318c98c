"""Wall-clock simulation engine: stepping, gap dynamics, and trace recording.

Time accounting
---------------
Every iteration costs a base duration (classical + quantum time); a selected
calibration action adds its own duration to the same step. A step runs only
if it fits in the remaining budget. When not even a bare iteration fits, the
current gap is held constant over the leftover time and the run ends.

The gap update for a step uses the freshness at the end-of-step age (after
any recovery and after the base duration), the conservative choice given
that drift keeps accumulating while an action runs. The gap area integrates
trapezoidally, (g_k + g_{k+1})/2 * dt_k, and the objective is that area
divided by the total budget (lower is better).

Trace layout
------------
Record 0 is the initial state at t = 0 with a zero step; each later record
is one executed iteration sampled at end of step. The residual hold is not a
record: ``mean_gap_of_trace`` re-applies it from the budget, which makes the
objective recomputable from the trace alone.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .calibration import LatencyRegime, PrimitiveSet, form_code, realized_recovery
from .drift import DeviceState, DriftModel, ProgressModel
from .errors import AccountingError, ConfigError, DomainError
from .policy import Policy

ACTION_NAMES = ("none", "light", "heavy")
ACTION_CODES = {name: code for code, name in enumerate(ACTION_NAMES)}

TRACE_HEADER = "t_s,age_s,l2,gap,action,step_s"

# Matches the step-feasibility tolerance used inside the kernels.
TIME_EPS = 1e-9


@dataclass(frozen=True)
class WorkloadModel:
    """Loop timings and gap dynamics of the hybrid workload."""

    t_class: float = 1.0
    t_alg: float = 45e-3
    t_budget: float = 600.0
    rho: float = 0.05
    r_max: float = 0.3
    g_min: float = 0.05
    progress: ProgressModel = field(default_factory=ProgressModel)

    def __post_init__(self):
        if self.t_class < 0.0:
            raise ConfigError(f"t_class must be >= 0, got {self.t_class}")
        if not self.t_alg > 0.0:
            raise ConfigError(f"t_alg must be > 0, got {self.t_alg}")
        if not self.t_budget > self.t_class + self.t_alg:
            raise ConfigError(
                "t_budget must exceed one bare iteration "
                f"({self.t_class + self.t_alg}), got {self.t_budget}"
            )
        if self.rho < 0.0:
            raise ConfigError(f"rho must be >= 0, got {self.rho}")
        if not 0.0 < self.r_max <= 1.0:
            raise ConfigError(f"r_max must be in (0, 1], got {self.r_max}")
        if not 0.0 < self.g_min < 1.0:
            raise ConfigError(f"g_min must be in (0, 1), got {self.g_min}")

    @property
    def t_base(self) -> float:
        return self.t_class + self.t_alg


class RunKey(NamedTuple):
    """Parameter fingerprint used to refuse cross-parameter comparisons."""

    alpha: float
    lam: float
    a0: float
    tau_rtt: float
    t_class: float
    t_alg: float
    t_budget: float
    tau_drift: float
    nu: float
    rho: float
    r_max: float
    g_min: float
    g0: float
    form: str


@dataclass(frozen=True)
class Trace:
    """Column arrays of one run; one row per record."""

    t_s: np.ndarray
    age_s: np.ndarray
    l2: np.ndarray
    gap: np.ndarray
    action: np.ndarray  # int codes, see ACTION_NAMES
    step_s: np.ndarray

    def __len__(self) -> int:
        return self.t_s.shape[0]

    def action_names(self) -> list[str]:
        return [ACTION_NAMES[a] for a in self.action]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(TRACE_HEADER + "\n")
        for i in range(len(self)):
            buf.write(
                f"{self.t_s[i]:.12g},{self.age_s[i]:.12g},{self.l2[i]:.12g},"
                f"{self.gap[i]:.12g},{ACTION_NAMES[self.action[i]]},{self.step_s[i]:.12g}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "Trace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if ",".join(header) != TRACE_HEADER:
                raise AccountingError(
                    f"unexpected trace header {','.join(header)!r}"
                )
            rows = list(reader)
        t = np.array([float(r[0]) for r in rows])
        age = np.array([float(r[1]) for r in rows])
        l2 = np.array([float(r[2]) for r in rows])
        gap = np.array([float(r[3]) for r in rows])
        action = np.array([ACTION_CODES[r[4]] for r in rows], dtype=np.int64)
        step = np.array([float(r[5]) for r in rows])
        return cls(t, age, l2, gap, action, step)


@dataclass(frozen=True)
class SimulationResult:
    mean_gap: float
    trace: Trace
    action_count: int
    heavy_count: int
    final_gap: float
    residual_s: float
    gap_area: float
    key: RunKey


def run(
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regime: LatencyRegime,
    policy: Policy,
    a0: float = 0.0,
    form: str = "rational",
    g0: float = 1.0,
) -> SimulationResult:
    """Simulate one policy over the full wall-clock budget.

    Deterministic: identical inputs produce bit-identical traces. Scheduled
    (open-loop) policies recover at full intrinsic strength; feedback
    policies pay the runtime realizability derating of ``form``.
    """
    if a0 < 0.0:
        raise DomainError(f"a0 must be >= 0, got {a0}")
    if not g0 > workload.g_min:
        raise ConfigError(f"g0 must exceed g_min {workload.g_min}, got {g0}")
    form_code(form)  # validate early

    t_base = workload.t_base
    light = primitives.light
    heavy = primitives.heavy
    dur_light = _kernels.cal_duration(light.base_time, light.rounds, regime.tau_rtt)
    dur_heavy = _kernels.cal_duration(heavy.base_time, heavy.rounds, regime.tau_rtt)
    rt_eta_light = realized_recovery(light, regime, "runtime", form)
    rt_eta_heavy = realized_recovery(heavy, regime, "runtime", form)

    n_max = int(workload.t_budget / t_base) + 3
    t_arr = np.empty(n_max)
    age_arr = np.empty(n_max)
    l2_arr = np.empty(n_max)
    gap_arr = np.empty(n_max)
    act_arr = np.zeros(n_max, dtype=np.int64)
    step_arr = np.empty(n_max)

    n, area, residual, action_count, heavy_count = _kernels.run_sim(
        a0,
        g0,
        workload.t_budget,
        t_base,
        drift.tau_drift,
        drift.nu,
        workload.progress.alpha,
        workload.progress.lam,
        workload.rho,
        workload.r_max,
        workload.g_min,
        dur_light,
        dur_heavy,
        light.strength,
        heavy.strength,
        rt_eta_light,
        rt_eta_heavy,
        light.target,
        heavy.target,
        policy.code,
        policy.period or 1,
        policy.horizon or 1,
        policy.common_horizon,
        t_arr,
        age_arr,
        l2_arr,
        gap_arr,
        act_arr,
        step_arr,
    )

    trace = Trace(
        t_s=t_arr[:n].copy(),
        age_s=age_arr[:n].copy(),
        l2=l2_arr[:n].copy(),
        gap=gap_arr[:n].copy(),
        action=act_arr[:n].copy(),
        step_s=step_arr[:n].copy(),
    )
    key = RunKey(
        alpha=workload.progress.alpha,
        lam=workload.progress.lam,
        a0=a0,
        tau_rtt=regime.tau_rtt,
        t_class=workload.t_class,
        t_alg=workload.t_alg,
        t_budget=workload.t_budget,
        tau_drift=drift.tau_drift,
        nu=drift.nu,
        rho=workload.rho,
        r_max=workload.r_max,
        g_min=workload.g_min,
        g0=g0,
        form=form,
    )
    return SimulationResult(
        mean_gap=area / workload.t_budget,
        trace=trace,
        action_count=int(action_count),
        heavy_count=int(heavy_count),
        final_gap=float(trace.gap[-1]),
        residual_s=residual,
        gap_area=area,
        key=key,
    )


def progress_rate(workload: WorkloadModel, l2: float) -> float:
    """Per-iteration contraction rate: rho * progress factor, capped at r_max."""
    if not 0.0 < l2 <= 1.0:
        raise DomainError(f"freshness must be in (0, 1], got {l2}")
    r = workload.rho * _kernels.progress_factor(
        l2, workload.progress.alpha, workload.progress.lam
    )
    if r < 0.0:
        return 0.0
    if r > workload.r_max:
        return workload.r_max
    return r


def gap_step(workload: WorkloadModel, gap: float, r: float) -> float:
    """One gap update toward the residual floor: g_min + (gap - g_min)(1 - r)."""
    if gap < workload.g_min:
        raise DomainError(f"gap {gap} is below the floor {workload.g_min}")
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"rate must be in [0, 1], got {r}")
    return workload.g_min + (gap - workload.g_min) * (1.0 - r)


def mean_gap_of_trace(trace: Trace, t_budget: float) -> float:
    """Recompute the mean gap from a trace alone.

    Trapezoid over consecutive records plus a constant hold of the final gap
    over [t_last, t_budget]. Raises if the trace cannot fit the budget.
    """
    if len(trace) == 0:
        raise AccountingError("empty trace")
    t = trace.t_s
    if np.any(np.diff(t) <= 0.0):
        raise AccountingError("trace times must be strictly increasing")
    if t[-1] > t_budget + TIME_EPS:
        raise AccountingError(
            f"trace spans {t[-1]} s but the budget is only {t_budget} s"
        )
    g = trace.gap
    area = float(np.sum(0.5 * (g[:-1] + g[1:]) * np.diff(t)))
    residual = t_budget - t[-1]
    if residual < 0.0:
        residual = 0.0
    area += float(g[-1]) * residual
    return area / t_budget


def trajectory_value(
    l2_with: Sequence[float],
    l2_without: Sequence[float],
    progress: ProgressModel,
    horizon: int,
) -> float:
    """Summed increase in future progress factors after an intervention.

    Both freshness sequences must cover horizon + 1 samples. Diagnostic
    only; the controllers optimize the gap integral, not this quantity.
    """
    if len(l2_with) != horizon + 1 or len(l2_without) != horizon + 1:
        raise DomainError(
            f"expected {horizon + 1} samples, got "
            f"{len(l2_with)} and {len(l2_without)}"
        )
    total = 0.0
    for lw, lo in zip(l2_with, l2_without):
        total += _kernels.progress_factor(lw, progress.alpha, progress.lam)
        total -= _kernels.progress_factor(lo, progress.alpha, progress.lam)
    return total


def freshness_horizon(
    drift: DriftModel, state: DeviceState, t_base: float, horizon: int
) -> list[float]:
    """Freshness samples over ``horizon`` further bare iterations."""
    ages = state.age + t_base * np.arange(horizon + 1)
    return [_kernels.freshness_of_age(a, drift.tau_drift, drift.nu) for a in ages]
