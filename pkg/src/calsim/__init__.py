"""Deterministic wall-clock simulator and policy harness for runtime
calibration of drifting devices."""

from ._kernels import NUMBA_ENABLED, backend_name
from .calibration import (
    CalibrationPrimitive,
    LatencyRegime,
    PrimitiveSet,
    apply_recovery,
    default_primitives,
    default_regimes,
    duration,
    realizability,
    realized_recovery,
    throughput_factor,
)
from .config import RunConfig, load_config, parse_duration, write_manifest
from .drift import (
    DeviceState,
    DriftModel,
    ProgressModel,
    age_of_freshness,
    effective_progress,
    freshness_of_age,
)
from .errors import (
    AccountingError,
    CalsimError,
    ComparisonError,
    ConfigError,
    DomainError,
)
from .policy import (
    Observation,
    Policy,
    RolloutConfig,
    evaluate_policy_grid,
    greedy_decision,
    rollout_decision,
    scheduled_decision,
)
from .sim import (
    SimulationResult,
    Trace,
    WorkloadModel,
    gap_step,
    mean_gap_of_trace,
    progress_rate,
    run,
    trajectory_value,
)

__version__ = "0.1.0"
