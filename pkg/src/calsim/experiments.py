"""Experiment families: gain maps, slices, diagnostics, scans, robustness.

The evaluation metric everywhere is the runtime gain ``delta_open``: the
best (lowest) mean gap over a strengthened family of open-loop references
minus the runtime controller's mean gap. Positive means the feedback
controller beats every open-loop schedule, including doing nothing.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .calibration import (
    CalibrationPrimitive,
    LatencyRegime,
    PrimitiveSet,
    default_regimes,
)
from .drift import DriftModel
from .errors import ComparisonError, ConfigError, DomainError
from .policy import Policy
from .sim import SimulationResult, WorkloadModel, run

REFERENCE_PERIODS = (3, 6, 12)

REPRESENTATIVE_ALPHA = 0.7
REPRESENTATIVE_A0 = 12 * 3600.0

DEFAULT_HORIZON = 6

GAINMAP_HEADER = "alpha,a0_s,regime,controller,delta_open"
SLICES_HEADER = "slice_kind,x,regime,gain"
DIAGNOSTICS_HEADER = "alpha,a0_s,regime,total_actions,heavy_fraction"
SCAN_HEADER = "t_class_s,regime,scan_kind,gain"
ROBUSTNESS_HEADER = "variant,param,ordering_holds"


def default_alpha_grid(n: int = 9) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def default_age_grid(n: int = 9, a0_max: float = 24 * 3600.0) -> np.ndarray:
    return np.linspace(0.0, a0_max, n)


def reference_family(periods=REFERENCE_PERIODS) -> list[Policy]:
    """No calibration plus periodic heavy and fixed light at each period."""
    members = [Policy.no_cal()]
    members += [Policy.periodic_heavy(k) for k in periods]
    members += [Policy.fixed_light(k) for k in periods]
    return members


def controller_policy(controller: str, horizon: int = DEFAULT_HORIZON) -> Policy:
    if controller == "greedy":
        return Policy.greedy()
    if controller == "rollout":
        return Policy.rollout(horizon)
    raise DomainError(f"unknown controller {controller!r}; expected greedy or rollout")


def delta_open(
    runtime_result: SimulationResult, reference_results
) -> float:
    """Best reference mean gap minus the runtime mean gap."""
    refs = list(reference_results)
    if not refs:
        raise ComparisonError("reference results must be non-empty")
    for ref in refs:
        if ref.key != runtime_result.key:
            raise ComparisonError(
                "reference evaluated at different parameters: "
                f"{ref.key} vs {runtime_result.key}"
            )
    return min(r.mean_gap for r in refs) - runtime_result.mean_gap


def _cell_delta(
    workload,
    drift,
    primitives,
    regime,
    controller_pol,
    alpha,
    a0,
    form,
    g0,
    periods=REFERENCE_PERIODS,
):
    w = replace(workload, progress=replace(workload.progress, alpha=float(alpha)))
    runtime_result = run(w, drift, primitives, regime, controller_pol, float(a0), form, g0)
    refs = [
        run(w, drift, primitives, regime, ref, float(a0), form, g0)
        for ref in reference_family(periods)
    ]
    return delta_open(runtime_result, refs), runtime_result


def _gain_cell_worker(task):
    (workload, drift, primitives, regime, controller_pol, alpha, a0, form, g0) = task
    try:
        delta, _ = _cell_delta(
            workload, drift, primitives, regime, controller_pol, alpha, a0, form, g0
        )
    except Exception as exc:
        raise ConfigError(f"cell (alpha={alpha}, a0={a0} s) failed: {exc}") from exc
    return delta


@dataclass(frozen=True)
class GainMap:
    alpha_grid: np.ndarray
    a0_grid: np.ndarray
    regime: str
    controller: str
    values: np.ndarray  # shape (len(alpha_grid), len(a0_grid))

    def __post_init__(self):
        if self.values.shape != (len(self.alpha_grid), len(self.a0_grid)):
            raise DomainError("gain map shape does not match its grids")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("gain map contains non-finite cells")

    @property
    def positive_cells(self) -> int:
        return int(np.sum(self.values > 0.0))


def gain_map(
    controller: str,
    regime: LatencyRegime,
    alpha_grid,
    a0_grid,
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    form: str = "rational",
    g0: float = 1.0,
    horizon: int = DEFAULT_HORIZON,
    n_workers: int = 1,
) -> GainMap:
    """Runtime gain over the reference family on an (alpha, a0) grid."""
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    a0_grid = np.asarray(a0_grid, dtype=float)
    if alpha_grid.size == 0 or a0_grid.size == 0:
        raise DomainError("grids must be non-empty")
    pol = controller_policy(controller, horizon)
    tasks = [
        (workload, drift, primitives, regime, pol, alpha, a0, form, g0)
        for alpha in alpha_grid
        for a0 in a0_grid
    ]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            flat = list(pool.map(_gain_cell_worker, tasks, chunksize=4))
    else:
        flat = [_gain_cell_worker(t) for t in tasks]
    values = np.array(flat, dtype=float).reshape(alpha_grid.size, a0_grid.size)
    return GainMap(alpha_grid, a0_grid, regime.name, pol.label, values)


@dataclass(frozen=True)
class SlicePoint:
    slice_kind: str  # "alpha" or "a0"
    x: float
    regime: str
    gain: float


def regime_slices(
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regimes: dict[str, LatencyRegime] | None = None,
    form: str = "rational",
    horizon: int = DEFAULT_HORIZON,
    a0_fixed: float = REPRESENTATIVE_A0,
    alpha_fixed: float = REPRESENTATIVE_ALPHA,
    alpha_grid=None,
    a0_grid=None,
    g0: float = 1.0,
) -> list[SlicePoint]:
    """One-dimensional rollout-gain slices through the representative point."""
    regimes = regimes or default_regimes()
    alpha_grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid)
    a0_grid = default_age_grid() if a0_grid is None else np.asarray(a0_grid)
    if not (alpha_grid.min() <= alpha_fixed <= alpha_grid.max()):
        raise DomainError("alpha_fixed lies outside the alpha grid range")
    if not (a0_grid.min() <= a0_fixed <= a0_grid.max()):
        raise DomainError("a0_fixed lies outside the a0 grid range")
    pol = controller_policy("rollout", horizon)
    points = []
    for name, regime in regimes.items():
        for alpha in alpha_grid:
            delta, _ = _cell_delta(
                workload, drift, primitives, regime, pol, alpha, a0_fixed, form, g0
            )
            points.append(SlicePoint("alpha", float(alpha), name, delta))
        for a0 in a0_grid:
            delta, _ = _cell_delta(
                workload, drift, primitives, regime, pol, alpha_fixed, a0, form, g0
            )
            points.append(SlicePoint("a0", float(a0), name, delta))
    return points


@dataclass(frozen=True)
class ActionDiagnostics:
    alpha_grid: np.ndarray
    a0_grid: np.ndarray
    regime: str
    total_actions: np.ndarray  # int matrix
    heavy_fraction: np.ndarray  # float matrix, 0/0 counted as 0
    heavy_counts: np.ndarray  # int matrix


def action_diagnostics(
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regimes: dict[str, LatencyRegime] | None = None,
    form: str = "rational",
    horizon: int = DEFAULT_HORIZON,
    alpha_grid=None,
    a0_grid=None,
    g0: float = 1.0,
) -> dict[str, ActionDiagnostics]:
    """Action counts and heavy share of the rollout controller per cell."""
    regimes = regimes or default_regimes()
    alpha_grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid)
    a0_grid = default_age_grid() if a0_grid is None else np.asarray(a0_grid)
    pol = controller_policy("rollout", horizon)
    out = {}
    for name, regime in regimes.items():
        totals = np.zeros((alpha_grid.size, a0_grid.size), dtype=np.int64)
        heavies = np.zeros_like(totals)
        for i, alpha in enumerate(alpha_grid):
            for j, a0 in enumerate(a0_grid):
                w = replace(
                    workload, progress=replace(workload.progress, alpha=float(alpha))
                )
                res = run(w, drift, primitives, regime, pol, float(a0), form, g0)
                totals[i, j] = res.action_count
                heavies[i, j] = res.heavy_count
        fraction = heavies / np.maximum(totals, 1)
        out[name] = ActionDiagnostics(
            alpha_grid, a0_grid, name, totals, fraction, heavies
        )
    return out


@dataclass(frozen=True)
class ScanPoint:
    t_class: float
    regime: str
    scan_kind: str  # "fixed_iteration" or "fixed_wall_clock"
    gain: float


def classical_scan(
    kind: str,
    t_class_grid,
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regimes: dict[str, LatencyRegime] | None = None,
    form: str = "rational",
    horizon: int = DEFAULT_HORIZON,
    n_iterations: int = 600,
    alpha: float = REPRESENTATIVE_ALPHA,
    a0: float = REPRESENTATIVE_A0,
    g0: float = 1.0,
) -> list[ScanPoint]:
    """Rollout gain versus the classical loop time.

    fixed_iteration keeps the nominal iteration count, so the budget grows
    with the classical time; fixed_wall_clock keeps the workload's budget.
    """
    if kind not in ("fixed_iteration", "fixed_wall_clock"):
        raise DomainError(f"unknown scan kind {kind!r}")
    grid = np.asarray(t_class_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("t_class grid must be positive and strictly increasing")
    regimes = regimes or default_regimes()
    pol = controller_policy("rollout", horizon)
    points = []
    for name, regime in regimes.items():
        for t_class in grid:
            if kind == "fixed_iteration":
                budget = n_iterations * (t_class + workload.t_alg)
            else:
                budget = workload.t_budget
            w = replace(workload, t_class=float(t_class), t_budget=float(budget))
            delta, _ = _cell_delta(
                w, drift, primitives, regime, pol, alpha, a0, form, g0
            )
            points.append(ScanPoint(float(t_class), name, kind, delta))
    return points


def default_t_class_grid(n: int = 13, lo: float = 10e-3, hi: float = 60.0) -> np.ndarray:
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class RobustnessRow:
    variant: str
    param: str
    ordering_holds: bool
    delta_cloud: float
    delta_local: float
    delta_tight: float


ROBUSTNESS_AXES = ("form", "lambda", "horizon", "tau_drift", "beta", "heavy_rounds")


def _regime_deltas(
    workload, drift, primitives, regimes, form, horizon, alpha, a0, g0
):
    pol = controller_policy("rollout", horizon)
    out = {}
    for name in ("cloud", "local", "tight"):
        delta, _ = _cell_delta(
            workload, drift, primitives, regimes[name], pol, alpha, a0, form, g0
        )
        out[name] = delta
    return out


def _ordering_holds(deltas) -> bool:
    return (
        deltas["cloud"] < 0.0 < deltas["tight"]
        and deltas["cloud"] <= deltas["local"] <= deltas["tight"]
    )


def robustness_scan(
    workload: WorkloadModel,
    drift: DriftModel,
    primitives: PrimitiveSet,
    regimes: dict[str, LatencyRegime] | None = None,
    axes=ROBUSTNESS_AXES,
    form: str = "rational",
    horizon: int = DEFAULT_HORIZON,
    alpha: float = REPRESENTATIVE_ALPHA,
    a0: float = REPRESENTATIVE_A0,
    g0: float = 1.0,
) -> list[RobustnessRow]:
    """Re-check the regime ordering of the gain at the representative point
    under model variants (always includes the all-defaults baseline row).
    """
    regimes = regimes or default_regimes()
    unknown = set(axes) - set(ROBUSTNESS_AXES)
    if unknown:
        raise DomainError(f"unknown robustness axes {sorted(unknown)}")

    def evaluate(tag, param, w=workload, d=drift, p=primitives, f=form, h=horizon):
        deltas = _regime_deltas(w, d, p, regimes, f, h, alpha, a0, g0)
        return RobustnessRow(
            tag, param, _ordering_holds(deltas),
            deltas["cloud"], deltas["local"], deltas["tight"],
        )

    rows = [evaluate("baseline", "default")]
    if "form" in axes:
        for variant_form in ("exponential", "linear_cutoff"):
            rows.append(evaluate("form", variant_form, f=variant_form))
    if "lambda" in axes:
        w = replace(workload, progress=replace(workload.progress, lam=0.6))
        rows.append(evaluate("lambda", "0.6", w=w))
    if "horizon" in axes:
        for h in range(2, 13):
            rows.append(evaluate("horizon", str(h), h=h))
    if "tau_drift" in axes:
        for scale in (0.5, 2.0):
            d = replace(drift, tau_drift=drift.tau_drift * scale)
            rows.append(evaluate("tau_drift", f"x{scale:g}", d=d))
    if "beta" in axes:
        for shift in (-0.1, 0.1):
            p = PrimitiveSet(
                light=replace(
                    primitives.light,
                    strength=min(1.0, max(0.0, primitives.light.strength + shift)),
                ),
                heavy=replace(
                    primitives.heavy,
                    strength=min(1.0, max(0.0, primitives.heavy.strength + shift)),
                ),
            )
            rows.append(evaluate("beta", f"{shift:+g}", p=p))
    if "heavy_rounds" in axes:
        for rounds in (10, 40):
            p = PrimitiveSet(
                light=primitives.light,
                heavy=replace(primitives.heavy, rounds=rounds),
            )
            rows.append(evaluate("heavy_rounds", str(rounds), p=p))
    return rows


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_gainmap_csv(maps, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(GAINMAP_HEADER + "\n")
        for m in maps:
            for i, alpha in enumerate(m.alpha_grid):
                for j, a0 in enumerate(m.a0_grid):
                    fh.write(
                        f"{_fmt(alpha)},{_fmt(a0)},{m.regime},{m.controller},"
                        f"{_fmt(m.values[i, j])}\n"
                    )


def write_slices_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SLICES_HEADER + "\n")
        for p in points:
            fh.write(f"{p.slice_kind},{_fmt(p.x)},{p.regime},{_fmt(p.gain)}\n")


def write_diagnostics_csv(diagnostics: dict[str, ActionDiagnostics], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(DIAGNOSTICS_HEADER + "\n")
        for name, diag in diagnostics.items():
            for i, alpha in enumerate(diag.alpha_grid):
                for j, a0 in enumerate(diag.a0_grid):
                    fh.write(
                        f"{_fmt(alpha)},{_fmt(a0)},{name},"
                        f"{int(diag.total_actions[i, j])},"
                        f"{_fmt(diag.heavy_fraction[i, j])}\n"
                    )


def write_scan_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SCAN_HEADER + "\n")
        for p in points:
            fh.write(f"{_fmt(p.t_class)},{p.regime},{p.scan_kind},{_fmt(p.gain)}\n")


def write_robustness_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(ROBUSTNESS_HEADER + "\n")
        for r in rows:
            fh.write(f"{r.variant},{r.param},{str(r.ordering_holds).lower()}\n")
