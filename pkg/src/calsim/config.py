"""Run configuration: defaults, key-value file parsing, manifest echo.

The file format is one ``key = value`` pair per line with ``#`` comments.
Durations accept the suffixes us, ms, s, min, h (bare numbers mean seconds)
and are normalized to seconds internally. Unknown keys are hard errors so a
typo cannot silently fall back to a default. ``write_manifest`` emits the
fully resolved configuration in the same format; re-loading a manifest
reproduces the identical configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields

from .calibration import (
    CalibrationPrimitive,
    FORMS,
    LatencyRegime,
    PrimitiveSet,
)
from .drift import DriftModel, ProgressModel
from .errors import ConfigError, DomainError
from .sim import WorkloadModel

_UNIT_SECONDS = {"us": 1e-6, "ms": 1e-3, "s": 1.0, "min": 60.0, "h": 3600.0}

_DURATION_RE = re.compile(
    r"^([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(us|ms|s|min|h)?$"
)


def parse_duration(text: str) -> float:
    """'6h' -> 21600.0; bare numbers are seconds."""
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse duration {text!r}")
    value = float(m.group(1))
    unit = m.group(2) or "s"
    return value * _UNIT_SECONDS[unit]


def format_duration(seconds: float) -> str:
    # repr keeps the float exact so a manifest round-trips bit-identically
    return f"{seconds!r}s"


@dataclass(frozen=True)
class RunConfig:
    """Every model parameter, with the evaluation defaults."""

    # Drift state
    tau_drift: float = 6 * 3600.0
    nu: float = 2.0
    # Workload progress
    alpha: float = 0.7
    lam: float = 2.0
    rho: float = 0.05
    r_max: float = 0.3
    g_min: float = 0.05
    g0: float = 1.0
    # Loop timings
    t_class: float = 1.0
    t_alg: float = 45e-3
    t_budget: float = 600.0
    # Latency regimes
    tau_cloud: float = 25e-3
    tau_local: float = 1e-3
    tau_tight: float = 4e-6
    # Calibration primitives
    light_base_time: float = 1.1e-3
    light_rounds: int = 1
    light_strength: float = 0.25
    light_target: float = 0.85
    light_tolerance: float = 20e-3
    heavy_base_time: float = 100e-3
    heavy_rounds: int = 20
    heavy_strength: float = 0.65
    heavy_target: float = 0.98
    heavy_tolerance: float = 2e-3
    # Controller
    horizon: int = 6
    realizability_form: str = "rational"
    rollout_common_horizon: bool = False
    # Initial state
    a0: float = 12 * 3600.0
    # Experiment grids
    alpha_grid_n: int = 9
    a0_grid_n: int = 9
    a0_grid_max: float = 24 * 3600.0
    t_class_scan_min: float = 10e-3
    t_class_scan_max: float = 60.0
    t_class_scan_n: int = 13
    fixed_iterations: int = 600

    def validate(self) -> "RunConfig":
        # Model constructors enforce their own invariants; surface any
        # violation as a configuration error.
        try:
            self.drift_model()
            self.workload_model()
            self.primitive_set()
            self.regimes()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        if self.realizability_form not in FORMS:
            raise ConfigError(
                f"realizability_form must be one of {FORMS}, "
                f"got {self.realizability_form!r}"
            )
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.a0 < 0.0:
            raise ConfigError(f"a0 must be >= 0, got {self.a0}")
        if not self.g0 > self.g_min:
            raise ConfigError(f"g0 must exceed g_min, got {self.g0}")
        if self.alpha_grid_n < 1 or self.a0_grid_n < 1 or self.t_class_scan_n < 2:
            raise ConfigError("grid sizes must be positive (scan needs >= 2)")
        if not 0.0 < self.t_class_scan_min < self.t_class_scan_max:
            raise ConfigError("t_class scan range must be positive and increasing")
        if self.fixed_iterations < 1:
            raise ConfigError("fixed_iterations must be >= 1")
        return self

    def drift_model(self) -> DriftModel:
        return DriftModel(tau_drift=self.tau_drift, nu=self.nu)

    def progress_model(self) -> ProgressModel:
        return ProgressModel(alpha=self.alpha, lam=self.lam)

    def workload_model(self) -> WorkloadModel:
        return WorkloadModel(
            t_class=self.t_class,
            t_alg=self.t_alg,
            t_budget=self.t_budget,
            rho=self.rho,
            r_max=self.r_max,
            g_min=self.g_min,
            progress=self.progress_model(),
        )

    def primitive_set(self) -> PrimitiveSet:
        return PrimitiveSet(
            light=CalibrationPrimitive(
                kind="light",
                base_time=self.light_base_time,
                rounds=self.light_rounds,
                strength=self.light_strength,
                target=self.light_target,
                tolerance=self.light_tolerance,
            ),
            heavy=CalibrationPrimitive(
                kind="heavy",
                base_time=self.heavy_base_time,
                rounds=self.heavy_rounds,
                strength=self.heavy_strength,
                target=self.heavy_target,
                tolerance=self.heavy_tolerance,
            ),
        )

    def regimes(self) -> dict[str, LatencyRegime]:
        return {
            "cloud": LatencyRegime("cloud", self.tau_cloud),
            "local": LatencyRegime("local", self.tau_local),
            "tight": LatencyRegime("tight", self.tau_tight),
        }


_DURATION_KEYS = {
    "tau_drift", "t_class", "t_alg", "t_budget",
    "tau_cloud", "tau_local", "tau_tight",
    "light_base_time", "light_tolerance",
    "heavy_base_time", "heavy_tolerance",
    "a0", "a0_grid_max", "t_class_scan_min", "t_class_scan_max",
}

# Config-file spelling of fields whose Python name differs.
_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(field_name: str, raw: str, lineno: int):
    typ = _FIELD_TYPES[field_name]
    try:
        if field_name in _DURATION_KEYS:
            return parse_duration(raw)
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "bool":
            lowered = raw.lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return raw
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"line {lineno}: bad value for {field_name}: {exc}") from exc


def parse_config_text(text: str) -> RunConfig:
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        field_name = _KEY_TO_FIELD.get(key, key)
        if field_name not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if field_name in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        overrides[field_name] = _parse_value(field_name, raw, lineno)
    return RunConfig(**overrides).validate()


def load_config(path=None) -> RunConfig:
    """Load a config file, or the defaults when no path is given."""
    if path is None:
        return RunConfig().validate()
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text)


def manifest_text(cfg: RunConfig) -> str:
    lines = ["# resolved configuration (re-loadable as a config file)"]
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        key = _FIELD_TO_KEY.get(f.name, f.name)
        if f.name in _DURATION_KEYS:
            rendered = format_duration(value)
        elif f.type == "bool":
            rendered = "true" if value else "false"
        elif f.type == "float":
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def write_manifest(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(manifest_text(cfg))
