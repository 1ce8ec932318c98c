import pytest

from calsim import (
    DriftModel,
    Policy,
    WorkloadModel,
    default_primitives,
    default_regimes,
    run,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger one compile of every kernel path before any timed assertion."""
    workload = WorkloadModel(t_budget=5.0)
    drift = DriftModel()
    primitives = default_primitives()
    regime = default_regimes()["tight"]
    for policy in (
        Policy.no_cal(),
        Policy.periodic_heavy(2),
        Policy.fixed_light(2),
        Policy.greedy(),
        Policy.rollout(2),
        Policy.rollout(2, common_horizon=True),
    ):
        run(workload, drift, primitives, regime, policy, a0=3600.0)
