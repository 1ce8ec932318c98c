import numpy as np
import pytest

from calsim import (
    ComparisonError,
    ConfigError,
    DomainError,
    DriftModel,
    Policy,
    WorkloadModel,
    default_primitives,
    default_regimes,
    run,
)
from calsim import experiments as ex

HOUR = 3600.0


@pytest.fixture
def models():
    return {
        "workload": WorkloadModel(),
        "drift": DriftModel(),
        "primitives": default_primitives(),
        "regimes": default_regimes(),
    }


def run_at(models, policy, regime="tight", alpha=0.7, a0=12 * HOUR):
    from dataclasses import replace

    w = replace(
        models["workload"], progress=replace(models["workload"].progress, alpha=alpha)
    )
    return run(w, models["drift"], models["primitives"],
               models["regimes"][regime], policy, a0=a0)


class TestReferenceFamily:
    def test_exactly_seven_members(self):
        family = ex.reference_family()
        assert len(family) == 7
        labels = [p.label for p in family]
        assert labels == [
            "no_cal",
            "periodic_heavy_3", "periodic_heavy_6", "periodic_heavy_12",
            "fixed_light_3", "fixed_light_6", "fixed_light_12",
        ]

    def test_all_members_are_open_loop(self):
        assert all(p.is_open_loop for p in ex.reference_family())


class TestDeltaOpen:
    def test_runtime_equal_to_best_reference_gives_zero(self, models):
        base = run_at(models, Policy.no_cal())
        assert ex.delta_open(base, [base]) == 0.0
        other = run_at(models, Policy.fixed_light(12))
        best = min(base.mean_gap, other.mean_gap)
        assert ex.delta_open(base, [base, other]) == best - base.mean_gap

    def test_sign_and_magnitude(self, models):
        runtime = run_at(models, Policy.rollout(6))
        refs = [run_at(models, p) for p in ex.reference_family()]
        delta = ex.delta_open(runtime, refs)
        assert delta == min(r.mean_gap for r in refs) - runtime.mean_gap

    def test_no_cal_membership_bounds_the_gain(self, models):
        # delta_open can never exceed the no-cal margin
        runtime = run_at(models, Policy.rollout(6))
        refs = [run_at(models, p) for p in ex.reference_family()]
        no_cal = next(r for r in refs if r.key == runtime.key)
        delta = ex.delta_open(runtime, refs)
        assert delta <= refs[0].mean_gap - runtime.mean_gap + 1e-15

    def test_subset_of_references_can_only_raise_the_gain(self, models):
        runtime = run_at(models, Policy.rollout(6))
        refs = [run_at(models, p) for p in ex.reference_family()]
        full = ex.delta_open(runtime, refs)
        for drop in range(len(refs)):
            subset = refs[:drop] + refs[drop + 1:]
            assert ex.delta_open(runtime, subset) >= full

    def test_empty_references_rejected(self, models):
        runtime = run_at(models, Policy.rollout(6))
        with pytest.raises(ComparisonError):
            ex.delta_open(runtime, [])

    def test_parameter_mismatch_rejected(self, models):
        runtime = run_at(models, Policy.rollout(6), alpha=0.7)
        off_ref = run_at(models, Policy.no_cal(), alpha=0.5)
        with pytest.raises(ComparisonError):
            ex.delta_open(runtime, [off_ref])


class TestGainMap:
    def test_single_cell_matches_direct_calls(self, models):
        m = ex.gain_map(
            "rollout", models["regimes"]["tight"], [0.7], [12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
        )
        runtime = run_at(models, Policy.rollout(6))
        refs = [run_at(models, p) for p in ex.reference_family()]
        assert m.values[0, 0] == ex.delta_open(runtime, refs)
        assert m.controller == "rollout_6"
        assert m.regime == "tight"

    def test_deterministic(self, models):
        args = (
            "greedy", models["regimes"]["local"],
            [0.0, 1.0], [0.0, 24 * HOUR],
            models["workload"], models["drift"], models["primitives"],
        )
        first = ex.gain_map(*args)
        second = ex.gain_map(*args)
        assert np.array_equal(first.values, second.values)

    def test_cell_errors_carry_coordinates(self, models):
        with pytest.raises(ConfigError, match=r"alpha=0\.5.*a0=-1"):
            ex.gain_map(
                "rollout", models["regimes"]["tight"], [0.5], [-1.0],
                models["workload"], models["drift"], models["primitives"],
            )

    def test_worker_pool_matches_serial(self, models):
        args = (
            "rollout", models["regimes"]["tight"],
            [0.0, 0.7], [0.0, 12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
        )
        serial = ex.gain_map(*args, n_workers=1)
        pooled = ex.gain_map(*args, n_workers=2)
        assert np.array_equal(serial.values, pooled.values)


class TestDiagnostics:
    def test_fresh_cells_have_no_actions(self, models):
        diags = ex.action_diagnostics(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], alpha_grid=[0.7], a0_grid=[0.0],
        )
        for diag in diags.values():
            assert diag.total_actions[0, 0] == 0
            assert diag.heavy_fraction[0, 0] == 0.0  # 0/0 convention

    def test_counts_match_traces(self, models):
        diags = ex.action_diagnostics(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], alpha_grid=[0.7], a0_grid=[12 * HOUR],
        )
        for name, diag in diags.items():
            res = run_at(models, Policy.rollout(6), regime=name)
            assert diag.total_actions[0, 0] == res.action_count
            assert diag.heavy_counts[0, 0] == res.heavy_count
            recount = int(np.sum(res.trace.action == 2))
            assert diag.heavy_counts[0, 0] == recount

    def test_heavy_fraction_is_integer_consistent(self, models):
        diags = ex.action_diagnostics(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], alpha_grid=[0.3, 0.7], a0_grid=[6 * HOUR, 18 * HOUR],
        )
        for diag in diags.values():
            reconstructed = diag.heavy_fraction * np.maximum(diag.total_actions, 1)
            assert np.allclose(reconstructed, diag.heavy_counts)


class TestClassicalScan:
    def test_grid_validation(self, models):
        for bad in ([], [0.0, 1.0], [2.0, 1.0]):
            with pytest.raises(DomainError):
                ex.classical_scan(
                    "fixed_wall_clock", bad, models["workload"],
                    models["drift"], models["primitives"], models["regimes"],
                )
        with pytest.raises(DomainError):
            ex.classical_scan(
                "adaptive", [1.0, 2.0], models["workload"],
                models["drift"], models["primitives"], models["regimes"],
            )

    def test_degenerate_window_has_little_gain(self, models):
        # one huge iteration fills most of the budget; a single runtime
        # reset can still trim that iteration slightly, nothing more
        points = ex.classical_scan(
            "fixed_wall_clock", [300.0, 500.0], models["workload"],
            models["drift"], models["primitives"],
            {"tight": models["regimes"]["tight"]},
        )
        gain = next(p.gain for p in points if p.t_class == 500.0)
        assert abs(gain) <= 0.02

    def test_fixed_iteration_budget_grows_with_t_class(self, models):
        points = ex.classical_scan(
            "fixed_iteration", [0.1, 1.0], models["workload"],
            models["drift"], models["primitives"],
            {"tight": models["regimes"]["tight"]}, n_iterations=50,
        )
        assert len(points) == 2
        assert all(np.isfinite(p.gain) for p in points)


class TestRobustness:
    def test_baseline_row_reports_the_default_ordering(self, models):
        rows = ex.robustness_scan(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], axes=(),
        )
        assert len(rows) == 1
        assert rows[0].variant == "baseline"
        assert rows[0].ordering_holds
        assert rows[0].delta_cloud < 0.0 < rows[0].delta_tight

    def test_requested_axes_present(self, models):
        rows = ex.robustness_scan(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], axes=("form", "lambda"),
        )
        variants = [r.variant for r in rows]
        assert variants == ["baseline", "form", "form", "lambda"]

    def test_unknown_axis_rejected(self, models):
        with pytest.raises(DomainError):
            ex.robustness_scan(
                models["workload"], models["drift"], models["primitives"],
                models["regimes"], axes=("noise",),
            )


class TestCsvWriters:
    def test_schemas_and_byte_stability(self, models, tmp_path):
        m = ex.gain_map(
            "rollout", models["regimes"]["tight"], [0.0, 0.7], [0.0, 12 * HOUR],
            models["workload"], models["drift"], models["primitives"],
        )
        gain_path = tmp_path / "gainmap.csv"
        ex.write_gainmap_csv([m], gain_path)
        lines = gain_path.read_text().splitlines()
        assert lines[0] == "alpha,a0_s,regime,controller,delta_open"
        assert len(lines) == 1 + 4

        diags = ex.action_diagnostics(
            models["workload"], models["drift"], models["primitives"],
            {"tight": models["regimes"]["tight"]},
            alpha_grid=[0.7], a0_grid=[12 * HOUR],
        )
        diag_path = tmp_path / "diagnostics.csv"
        ex.write_diagnostics_csv(diags, diag_path)
        assert diag_path.read_text().splitlines()[0] == (
            "alpha,a0_s,regime,total_actions,heavy_fraction"
        )

        points = ex.classical_scan(
            "fixed_wall_clock", [0.5, 2.0], models["workload"],
            models["drift"], models["primitives"],
            {"tight": models["regimes"]["tight"]},
        )
        scan_path = tmp_path / "scans.csv"
        ex.write_scan_csv(points, scan_path)
        assert scan_path.read_text().splitlines()[0] == (
            "t_class_s,regime,scan_kind,gain"
        )

        rows = ex.robustness_scan(
            models["workload"], models["drift"], models["primitives"],
            models["regimes"], axes=(),
        )
        rob_path = tmp_path / "robustness.csv"
        ex.write_robustness_csv(rows, rob_path)
        text = rob_path.read_text()
        assert text.splitlines()[0] == "variant,param,ordering_holds"
        assert text.splitlines()[1] == "baseline,default,true"

        # regenerating produces identical bytes
        ex.write_gainmap_csv([m], tmp_path / "gainmap2.csv")
        assert gain_path.read_bytes() == (tmp_path / "gainmap2.csv").read_bytes()

    def test_slices_schema(self, models, tmp_path):
        points = ex.regime_slices(
            models["workload"], models["drift"], models["primitives"],
            {"tight": models["regimes"]["tight"]},
            alpha_grid=[0.0, 0.7, 1.0], a0_grid=[0.0, 12 * HOUR, 24 * HOUR],
        )
        path = tmp_path / "slices.csv"
        ex.write_slices_csv(points, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "slice_kind,x,regime,gain"
        assert len(lines) == 1 + 6  # 3 alpha points + 3 a0 points

    def test_slice_fixed_points_must_lie_inside_grids(self, models):
        with pytest.raises(DomainError):
            ex.regime_slices(
                models["workload"], models["drift"], models["primitives"],
                {"tight": models["regimes"]["tight"]},
                alpha_grid=[0.0, 0.5], a0_grid=[0.0, 24 * HOUR],
                alpha_fixed=0.9,
            )
