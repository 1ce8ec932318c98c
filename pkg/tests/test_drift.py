import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calsim import (
    DeviceState,
    DomainError,
    DriftModel,
    ProgressModel,
    age_of_freshness,
    effective_progress,
    freshness_of_age,
)

HOUR = 3600.0


class TestFreshnessOfAge:
    def test_zero_age_is_fully_fresh(self):
        assert freshness_of_age(DriftModel(), 0.0) == 1.0

    @pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 4.0])
    def test_half_life_at_drift_scale(self, nu):
        model = DriftModel(tau_drift=6 * HOUR, nu=nu)
        assert freshness_of_age(model, 6 * HOUR) == pytest.approx(0.5, rel=1e-15)

    def test_doubled_age_with_quadratic_decay(self):
        # 12 h on a 6 h drift scale with nu = 2: 1 / (1 + 4)
        model = DriftModel(tau_drift=6 * HOUR, nu=2.0)
        assert freshness_of_age(model, 12 * HOUR) == pytest.approx(0.2, rel=1e-15)

    def test_negative_age_rejected(self):
        with pytest.raises(DomainError):
            freshness_of_age(DriftModel(), -1.0)

    def test_strictly_decreasing(self):
        model = DriftModel()
        ages = np.geomspace(1.0, 60 * HOUR, 50)
        values = [freshness_of_age(model, a) for a in ages]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestAgeOfFreshness:
    def test_fresh_maps_to_zero_age(self):
        assert age_of_freshness(DriftModel(), 1.0) == 0.0

    def test_half_freshness_maps_to_drift_scale(self):
        model = DriftModel(tau_drift=6 * HOUR, nu=3.0)
        assert age_of_freshness(model, 0.5) == pytest.approx(6 * HOUR, rel=1e-12)

    def test_inverse_of_doubled_age_example(self):
        model = DriftModel(tau_drift=6 * HOUR, nu=2.0)
        assert age_of_freshness(model, 0.2) == pytest.approx(12 * HOUR, rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -0.2, 1.0 + 1e-12])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(DomainError):
            age_of_freshness(DriftModel(), bad)

    # float64 can resolve an age through the freshness value only once
    # (age/tau)^nu clears the spacing of floats near 1.0 (~1.1e-16); below
    # that the composition is information-limited, not wrong. These tests
    # cover the attainable envelope; the literal acceptance criterion over
    # [1 s, 60 h] is exercised (and analyzed) in test_acceptance.py.
    @pytest.mark.parametrize("nu,age_lo", [(1.0, 1.0), (2.0, 8.0), (4.0, 1000.0)])
    def test_round_trip(self, nu, age_lo):
        model = DriftModel(tau_drift=6 * HOUR, nu=nu)
        for age in np.geomspace(age_lo, 10 * 6 * HOUR, 100):
            back = age_of_freshness(model, freshness_of_age(model, age))
            assert abs(back - age) <= 1e-9 * max(1.0, age)

    @given(
        age=st.floats(min_value=1e-3, max_value=1e6),
        nu=st.floats(min_value=0.3, max_value=6.0),
    )
    @settings(deadline=None, max_examples=200)
    def test_round_trip_property(self, age, nu):
        from hypothesis import assume

        model = DriftModel(tau_drift=6 * HOUR, nu=nu)
        assume((age / model.tau_drift) ** nu >= 1e-7)  # resolvable in float64
        back = age_of_freshness(model, freshness_of_age(model, age))
        assert abs(back - age) <= 1e-9 * max(1.0, age)

    def test_inverse_exact_given_representable_freshness(self):
        # freshness -> age -> freshness is well-conditioned everywhere
        for nu in (1.0, 2.0, 4.0):
            model = DriftModel(tau_drift=6 * HOUR, nu=nu)
            for l2 in np.geomspace(1e-12, 1.0, 120):
                age = age_of_freshness(model, float(l2))
                assert freshness_of_age(model, age) == pytest.approx(
                    float(l2), rel=1e-12
                )


class TestEffectiveProgress:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("lam", [0.6, 2.0])
    def test_fully_fresh_gives_exactly_one(self, alpha, lam):
        model = ProgressModel(alpha=alpha, lam=lam)
        assert effective_progress(model, 1.0) == 1.0

    def test_pure_sqrt_branch(self):
        assert effective_progress(ProgressModel(alpha=0.0), 0.25) == 0.5

    def test_blended_value(self):
        # 0.3*sqrt(0.2) + 0.7*0.2^2, checked against a 40-digit evaluation
        model = ProgressModel(alpha=0.7, lam=2.0)
        assert effective_progress(model, 0.2) == pytest.approx(
            0.16216407864998738, rel=1e-12
        )

    def test_sensitive_branch_is_plain_power(self):
        model = ProgressModel(alpha=1.0, lam=2.0)
        for l2 in np.linspace(0.05, 1.0, 20):
            assert effective_progress(model, float(l2)) == float(l2) ** 2.0

    def test_monotone_in_freshness(self):
        model = ProgressModel(alpha=0.7, lam=2.0)
        grid = np.linspace(0.01, 1.0, 50)
        values = [effective_progress(model, float(x)) for x in grid]
        assert all(a < b for a, b in zip(values, values[1:]))

    @given(
        alpha=st.floats(min_value=0.0, max_value=1.0),
        lam=st.floats(min_value=0.2, max_value=4.0),
        l2=st.floats(min_value=1e-6, max_value=1.0),
    )
    @settings(deadline=None, max_examples=200)
    def test_stays_in_unit_interval(self, alpha, lam, l2):
        value = effective_progress(ProgressModel(alpha=alpha, lam=lam), l2)
        assert 0.0 < value <= 1.0 + 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            effective_progress(ProgressModel(), 0.0)
        with pytest.raises(DomainError):
            effective_progress(ProgressModel(), 1.5)


class TestModelValidation:
    def test_bad_drift_params(self):
        with pytest.raises(DomainError):
            DriftModel(tau_drift=0.0)
        with pytest.raises(DomainError):
            DriftModel(nu=-1.0)

    def test_bad_progress_params(self):
        with pytest.raises(DomainError):
            ProgressModel(alpha=1.5)
        with pytest.raises(DomainError):
            ProgressModel(lam=0.0)

    def test_device_state(self):
        state = DeviceState(age=7200.0)
        assert state.freshness(DriftModel(tau_drift=7200.0)) == pytest.approx(0.5)
        with pytest.raises(DomainError):
            DeviceState(age=-1.0)

    def test_freshness_decreasing_pairwise(self):
        model = DriftModel()
        assert freshness_of_age(model, 100.0) > freshness_of_age(model, 200.0)
        assert math.isclose(
            age_of_freshness(model, freshness_of_age(model, 100.0)), 100.0
        )
