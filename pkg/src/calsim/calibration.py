"""Calibration primitives, latency-dependent durations, and the recovery map.

Two primitives exist: a light single-round retune and a heavy multi-round
recovery. An action's wall-clock duration grows with the control round-trip
time through its round count, so heavy actions are far more latency-sensitive
than light ones. How much of the intrinsic recovery strength is actually
realized depends on where the action runs: scheduled maintenance gets the
full strength, runtime feedback is derated by a latency realizability factor.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .drift import DeviceState, DriftModel
from .errors import DomainError

FORMS = ("rational", "exponential", "linear_cutoff")
MODES = ("scheduled", "runtime")

_FORM_CODES = {
    "rational": _kernels.FORM_RATIONAL,
    "exponential": _kernels.FORM_EXPONENTIAL,
    "linear_cutoff": _kernels.FORM_LINEAR_CUTOFF,
}


def form_code(form: str) -> int:
    try:
        return _FORM_CODES[form]
    except KeyError:
        raise DomainError(f"unknown realizability form {form!r}; expected one of {FORMS}")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise DomainError(f"unknown execution mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class CalibrationPrimitive:
    """One recovery action.

    base_time: execution time excluding feedback latency, seconds.
    rounds: interactive feedback rounds (each pays one round trip).
    strength: intrinsic recovery fraction in [0, 1].
    target: freshness the action recovers toward, in (0, 1].
    tolerance: timing tolerance governing runtime realizability, seconds.
    """

    kind: str
    base_time: float
    rounds: int
    strength: float
    target: float
    tolerance: float

    def __post_init__(self):
        if self.kind not in ("light", "heavy"):
            raise DomainError(f"kind must be 'light' or 'heavy', got {self.kind!r}")
        if not self.base_time > 0.0:
            raise DomainError(f"base_time must be > 0, got {self.base_time}")
        if self.rounds < 1:
            raise DomainError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 <= self.strength <= 1.0:
            raise DomainError(f"strength must be in [0, 1], got {self.strength}")
        if not 0.0 < self.target <= 1.0:
            raise DomainError(f"target must be in (0, 1], got {self.target}")
        if not self.tolerance > 0.0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")


@dataclass(frozen=True)
class LatencyRegime:
    """A named control-loop round-trip time."""

    name: str
    tau_rtt: float

    def __post_init__(self):
        if self.tau_rtt < 0.0:
            raise DomainError(f"tau_rtt must be >= 0, got {self.tau_rtt}")


@dataclass(frozen=True)
class PrimitiveSet:
    light: CalibrationPrimitive
    heavy: CalibrationPrimitive

    def __post_init__(self):
        if self.light.kind != "light" or self.heavy.kind != "heavy":
            raise DomainError("PrimitiveSet fields must hold matching kinds")


def duration(p: CalibrationPrimitive, regime: LatencyRegime) -> float:
    """Wall-clock cost of the action: base_time + rounds * tau_rtt."""
    return _kernels.cal_duration(p.base_time, p.rounds, regime.tau_rtt)


def realizability(form: str, tau: float, p: CalibrationPrimitive) -> float:
    """Latency derating factor in (0, 1]; 1 at tau == 0, non-increasing.

    rational: 1 / (1 + tau/tol); exponential: exp(-tau/tol);
    linear_cutoff: 1 - tau/(2 tol), floored at 1e-6. The rational and linear
    forms agree at tau == tol (both 0.5).
    """
    if tau < 0.0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    return _kernels.realizability(form_code(form), tau, p.tolerance)


def realized_recovery(
    p: CalibrationPrimitive,
    regime: LatencyRegime,
    mode: str = "runtime",
    form: str = "rational",
) -> float:
    """Recovery fraction actually achieved by the action.

    Scheduled maintenance runs outside the live feedback deadline and keeps
    the full intrinsic strength; runtime feedback is derated by the
    realizability factor at the regime's round-trip time.
    """
    check_mode(mode)
    if mode == "scheduled":
        return p.strength
    return realizability(form, regime.tau_rtt, p) * p.strength


def apply_recovery(
    state: DeviceState,
    p: CalibrationPrimitive,
    regime: LatencyRegime,
    mode: str,
    form: str,
    drift: DriftModel,
) -> tuple[DeviceState, float]:
    """Run one recovery action from ``state``; returns (new state, elapsed).

    The device first drifts for the full action duration, then recovery
    closes a fraction of the remaining distance to the action's target
    freshness and the result is mapped back to an equivalent age. The new
    age never exceeds the drifted age, so recovery never harms.
    """
    elapsed = duration(p, regime)
    eta = realized_recovery(p, regime, mode, form)
    new_age = _kernels.recovered_age(
        state.age, elapsed, eta, p.target, drift.tau_drift, drift.nu
    )
    return DeviceState(age=new_age), elapsed


def throughput_factor(
    p: CalibrationPrimitive, regime: LatencyRegime, t_alg: float
) -> float:
    """Fraction of an iteration spent on the algorithm if the action runs.

    Diagnostic only: the simulator charges calibration time to the wall
    clock directly, so this factor is never folded into the gap dynamics.
    """
    if not t_alg > 0.0:
        raise DomainError(f"t_alg must be > 0, got {t_alg}")
    t_cal = duration(p, regime)
    return t_alg / (t_alg + t_cal)


def default_primitives(
    light_target: float = 0.85,
    heavy_target: float = 0.98,
    light_strength: float = 0.25,
    heavy_strength: float = 0.65,
) -> PrimitiveSet:
    """Default light/heavy pair (millisecond retune vs multi-round recovery)."""
    return PrimitiveSet(
        light=CalibrationPrimitive(
            kind="light", base_time=1.1e-3, rounds=1, strength=light_strength,
            target=light_target, tolerance=20e-3,
        ),
        heavy=CalibrationPrimitive(
            kind="heavy", base_time=100e-3, rounds=20, strength=heavy_strength,
            target=heavy_target, tolerance=2e-3,
        ),
    )


def default_regimes() -> dict[str, LatencyRegime]:
    """The three evaluation regimes: cloud 25 ms, local 1 ms, tight 4 us."""
    return {
        "cloud": LatencyRegime("cloud", 25e-3),
        "local": LatencyRegime("local", 1e-3),
        "tight": LatencyRegime("tight", 4e-6),
    }
