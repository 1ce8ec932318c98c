import numpy as np
import pytest

from calsim import (
    DomainError,
    DriftModel,
    Observation,
    Policy,
    RolloutConfig,
    WorkloadModel,
    default_primitives,
    default_regimes,
    evaluate_policy_grid,
    greedy_decision,
    rollout_decision,
    run,
    scheduled_decision,
)

HOUR = 3600.0


@pytest.fixture
def models():
    return {
        "workload": WorkloadModel(),
        "drift": DriftModel(),
        "primitives": default_primitives(),
        "regimes": default_regimes(),
    }


class TestPolicyType:
    def test_constructors_and_labels(self):
        assert Policy.no_cal().label == "no_cal"
        assert Policy.periodic_heavy(3).label == "periodic_heavy_3"
        assert Policy.fixed_light(12).label == "fixed_light_12"
        assert Policy.greedy().label == "greedy"
        assert Policy.rollout(6).label == "rollout_6"

    def test_validation(self):
        with pytest.raises(DomainError):
            Policy("periodic_heavy")
        with pytest.raises(DomainError):
            Policy.periodic_heavy(0)
        with pytest.raises(DomainError):
            Policy.rollout(0)
        with pytest.raises(DomainError):
            Policy("annealed")

    def test_open_loop_flag(self):
        assert Policy.fixed_light(3).is_open_loop
        assert not Policy.greedy().is_open_loop


class TestScheduledDecision:
    def test_no_cal_never_fires(self, models):
        w = models["workload"]
        obs = Observation(age=50 * HOUR, gap=1.0, remaining=w.t_budget)
        assert scheduled_decision(Policy.no_cal(), obs, w) == "none"

    def test_first_decision_is_below_threshold(self, models):
        w = models["workload"]
        obs = Observation(age=0.0, gap=1.0, remaining=w.t_budget)
        assert scheduled_decision(Policy.periodic_heavy(3), obs, w) == "none"

    def test_fires_once_elapsed_crosses_the_period(self, models):
        # T_base = 1.045 s, period 3 -> threshold 3.135 s <= elapsed 3.2 s
        w = models["workload"]
        obs = Observation(age=1.0, gap=0.9, remaining=w.t_budget - 3.2)
        assert scheduled_decision(Policy.periodic_heavy(3), obs, w) == "heavy"
        assert scheduled_decision(Policy.fixed_light(3), obs, w) == "light"

    def test_fire_count_moves_the_threshold(self, models):
        w = models["workload"]
        obs = Observation(age=1.0, gap=0.9, remaining=w.t_budget - 3.2)
        assert (
            scheduled_decision(Policy.periodic_heavy(3), obs, w, fires_so_far=1)
            == "none"
        )

    def test_blind_to_device_state(self, models):
        # perturbing age and gap must not change the outcome
        w = models["workload"]
        for elapsed in (0.0, 2.0, 3.2, 40.0):
            outputs = set()
            for age in (0.0, 1 * HOUR, 20 * HOUR):
                for gap in (0.06, 0.5, 1.0):
                    obs = Observation(age=age, gap=gap, remaining=w.t_budget - elapsed)
                    outputs.add(scheduled_decision(Policy.periodic_heavy(6), obs, w))
            assert len(outputs) == 1

    def test_rejects_feedback_policies(self, models):
        w = models["workload"]
        obs = Observation(age=0.0, gap=1.0, remaining=w.t_budget)
        with pytest.raises(DomainError):
            scheduled_decision(Policy.greedy(), obs, w)


class TestFeedbackDecisions:
    def test_rollout_fires_heavy_at_the_representative_point(self, models):
        # pinned regression: aged sensitive workload, tight loop, horizon 6
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=600.0)
        action = rollout_decision(
            RolloutConfig(horizon=6), obs, models["workload"], models["drift"],
            models["primitives"], models["regimes"]["tight"],
        )
        assert action == "heavy"

    def test_rollout_in_cloud_prefers_light(self, models):
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=600.0)
        action = rollout_decision(
            RolloutConfig(horizon=6), obs, models["workload"], models["drift"],
            models["primitives"], models["regimes"]["cloud"],
        )
        assert action == "light"

    def test_feasibility_forcing(self, models):
        # remaining sits between the bare step (1.045 s) and the cheapest
        # calibrating step (1.0461 s): rollout must decline to calibrate
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=1.0455)
        action = rollout_decision(
            RolloutConfig(horizon=6), obs, models["workload"], models["drift"],
            models["primitives"], models["regimes"]["tight"],
        )
        assert action == "none"

    def test_nothing_fits_returns_none(self, models):
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=0.5)
        action = rollout_decision(
            RolloutConfig(horizon=6), obs, models["workload"], models["drift"],
            models["primitives"], models["regimes"]["tight"],
        )
        assert action == "none"

    def test_fresh_device_is_left_alone(self, models):
        # no recoverable headroom at age zero in any regime
        for regime in models["regimes"].values():
            obs = Observation(age=0.0, gap=1.0, remaining=600.0)
            assert rollout_decision(
                RolloutConfig(horizon=6), obs, models["workload"],
                models["drift"], models["primitives"], regime,
            ) == "none"
            assert greedy_decision(
                obs, models["workload"], models["drift"],
                models["primitives"], regime,
            ) == "none"

    def test_greedy_is_more_conservative_than_rollout_in_tight(self, models):
        # at the representative point the one-step view declines the heavy
        # reset the six-step view accepts
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=600.0)
        greedy = greedy_decision(
            obs, models["workload"], models["drift"], models["primitives"],
            models["regimes"]["tight"],
        )
        assert greedy in ("none", "light")

    def test_common_horizon_variant_runs(self, models):
        obs = Observation(age=12 * HOUR, gap=1.0, remaining=600.0)
        action = rollout_decision(
            RolloutConfig(horizon=6, common_horizon=True), obs,
            models["workload"], models["drift"], models["primitives"],
            models["regimes"]["tight"],
        )
        assert action in ("none", "light", "heavy")


class TestGreedyRolloutEquivalence:
    def test_bit_identical_traces_on_a_grid(self, models):
        # the dedicated one-step comparator and the general lookahead loop
        # at horizon 1 must agree float-for-float (the full 5x5 grid over
        # three regimes runs in the acceptance suite)
        for regime in models["regimes"].values():
            for alpha in (0.0, 0.7):
                for a0 in (0.0, 12 * HOUR):
                    from dataclasses import replace

                    w = replace(
                        models["workload"],
                        progress=replace(models["workload"].progress, alpha=alpha),
                    )
                    greedy = run(w, models["drift"], models["primitives"],
                                 regime, Policy.greedy(), a0=a0)
                    roll1 = run(w, models["drift"], models["primitives"],
                                regime, Policy.rollout(1), a0=a0)
                    for column in ("t_s", "age_s", "l2", "gap", "action", "step_s"):
                        assert np.array_equal(
                            getattr(greedy.trace, column),
                            getattr(roll1.trace, column),
                        )


class TestFeasibilitySafety:
    @pytest.mark.parametrize(
        "policy",
        [Policy.periodic_heavy(1), Policy.fixed_light(1), Policy.greedy(),
         Policy.rollout(6)],
        ids=lambda p: p.label,
    )
    def test_no_step_ever_exceeds_the_remaining_budget(self, models, policy):
        res = run(models["workload"], models["drift"], models["primitives"],
                  models["regimes"]["cloud"], policy, a0=12 * HOUR)
        elapsed_before = res.trace.t_s[:-1]
        steps = res.trace.step_s[1:]
        remaining_before = models["workload"].t_budget - elapsed_before
        assert np.all(steps <= remaining_before + 1e-9)


class TestEvaluatePolicyGrid:
    def test_single_cell_matches_a_direct_run(self, models):
        out = evaluate_policy_grid(
            [Policy.no_cal()], [0.7], [12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
            models["regimes"]["tight"],
        )
        direct = run(models["workload"], models["drift"], models["primitives"],
                     models["regimes"]["tight"], Policy.no_cal(), a0=12 * HOUR)
        assert out["no_cal"][0][0].mean_gap == direct.mean_gap

    def test_grid_is_deterministic(self, models):
        args = (
            [Policy.greedy()], [0.0, 0.7], [0.0, 12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
            models["regimes"]["local"],
        )
        first = evaluate_policy_grid(*args)
        second = evaluate_policy_grid(*args)
        for i in range(2):
            for j in range(2):
                assert (
                    first["greedy"][i][j].mean_gap
                    == second["greedy"][i][j].mean_gap
                )

    def test_degradation_monotonicity_across_cells(self, models):
        out = evaluate_policy_grid(
            [Policy.no_cal()], [0.0, 0.7], [0.0, 12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
            models["regimes"]["cloud"],
        )
        fresh_tolerant = out["no_cal"][0][0].mean_gap
        aged_sensitive = out["no_cal"][1][1].mean_gap
        assert aged_sensitive > fresh_tolerant

    def test_worker_pool_merge_matches_serial(self, models):
        args = (
            [Policy.no_cal(), Policy.greedy()], [0.0, 0.7], [0.0, 12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
            models["regimes"]["tight"],
        )
        serial = evaluate_policy_grid(*args, n_workers=1)
        pooled = evaluate_policy_grid(*args, n_workers=2)
        for label in ("no_cal", "greedy"):
            for i in range(2):
                for j in range(2):
                    assert (
                        serial[label][i][j].mean_gap
                        == pooled[label][i][j].mean_gap
                    )

    def test_empty_grid_rejected(self, models):
        with pytest.raises(DomainError):
            evaluate_policy_grid(
                [Policy.no_cal()], [], [0.0],
                models["workload"], models["drift"], models["primitives"],
                models["regimes"]["tight"],
            )
