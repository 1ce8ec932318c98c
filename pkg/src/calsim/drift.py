"""Freshness drift map, its inverse, and the workload progress factor.

The device state is a single equivalent age (seconds since the device was
last ideally calibrated). Freshness is always derived from age through the
drift map, never stored, so repeated forward/inverse mapping cannot
accumulate error into the state itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .errors import DomainError


@dataclass(frozen=True)
class DriftModel:
    """Hill-type freshness decay: 1 / (1 + (age/tau_drift)^nu)."""

    tau_drift: float = 21600.0  # seconds
    nu: float = 2.0

    def __post_init__(self):
        if not self.tau_drift > 0.0:
            raise DomainError(f"tau_drift must be > 0, got {self.tau_drift}")
        if not self.nu > 0.0:
            raise DomainError(f"nu must be > 0, got {self.nu}")


@dataclass(frozen=True)
class ProgressModel:
    """Progress factor (1-alpha)*sqrt(l2) + alpha*l2**lam.

    alpha interpolates from noise-tolerant (0) to freshness-sensitive (1)
    workloads; lam shapes the penalty of the sensitive branch.
    """

    alpha: float = 0.7
    lam: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.lam > 0.0:
            raise DomainError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class DeviceState:
    """Drifting device state: the equivalent calibration age in seconds."""

    age: float = 0.0

    def __post_init__(self):
        if not self.age >= 0.0:
            raise DomainError(f"age must be >= 0, got {self.age}")

    def freshness(self, model: DriftModel) -> float:
        return freshness_of_age(model, self.age)


def freshness_of_age(model: DriftModel, age: float) -> float:
    """Freshness in (0, 1] at a given equivalent age; strictly decreasing."""
    if age < 0.0:
        raise DomainError(f"age must be >= 0, got {age}")
    return _kernels.freshness_of_age(age, model.tau_drift, model.nu)


def age_of_freshness(model: DriftModel, l2: float) -> float:
    """Equivalent age for a freshness value; exact inverse of the drift map."""
    if not 0.0 < l2 <= 1.0:
        raise DomainError(f"freshness must be in (0, 1], got {l2}")
    return _kernels.age_of_freshness(l2, model.tau_drift, model.nu)


def effective_progress(model: ProgressModel, l2: float) -> float:
    """Per-iteration progress factor at a given freshness; 1 when l2 == 1."""
    if not 0.0 < l2 <= 1.0:
        raise DomainError(f"freshness must be in (0, 1], got {l2}")
    return _kernels.progress_factor(l2, model.alpha, model.lam)
