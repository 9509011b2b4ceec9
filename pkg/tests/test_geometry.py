import math

import numpy as np
import pytest

from thermops import (
    BlockPartialSwap,
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    UniformPartialSwap,
    analytic_trajectory,
    collide,
    contour_grid,
    detect_violations,
    divergence_rows,
    ensemble_thermal_state,
    qubit_violation_scan,
    simplex_coords,
    simplex_path,
    straightness_deviation,
    thermal_state,
)

QUBIT = EnergySpec(2, 2.0, 1.0)
QUTRIT = EnergySpec(3, 2.0, 1.0)


class TestDetectViolations:
    def test_decreasing_series_is_clean(self):
        report = detect_violations(np.linspace(3.0, 0.0, 40), 1e-12)
        assert report.events == ()
        assert report.first_violation_step is None
        assert report.max_increase == 0.0
        assert not report.violated

    def test_flags_each_rise_above_tolerance(self):
        series = np.array([1.0, 0.5, 0.5 + 2e-7, 0.2, 0.9])
        report = detect_violations(series, 1e-7, alpha=2.0)
        assert report.events == ((1, pytest.approx(2e-7)), (3, pytest.approx(0.7)))
        assert report.first_violation_step == 1
        assert report.max_increase == pytest.approx(0.7)
        assert report.alpha == 2.0

    def test_tolerance_filters_noise(self):
        series = np.array([1.0, 0.5, 0.5 + 1e-13, 0.3])
        assert not detect_violations(series, 1e-12).violated
        assert detect_violations(series, 1e-14).violated

    def test_noiseless_trajectories_are_monotone(self):
        rng = np.random.default_rng(17)
        for spec in (QUBIT, QUTRIT):
            tau = thermal_state(spec)
            initial = DiagonalState(rng.dirichlet(np.ones(spec.d)))
            path = analytic_trajectory(initial, tau, 0.1, 300)
            for alpha in (0.0, 0.5, 1.0, 2.0, math.inf):
                series = divergence_rows(path, tau, alpha)
                assert not detect_violations(series, 1e-12).violated

    def test_perturbed_mean_dynamics_rises_after_crossing(self):
        mean_thermal = ensemble_thermal_state(QUBIT, PerturbationSpec(0.1))
        path = analytic_trajectory(DiagonalState.ground(2), mean_thermal, 0.1, 300)
        series = divergence_rows(path, thermal_state(QUBIT), math.inf)
        report = detect_violations(series, 1e-10)
        assert report.violated
        assert report.first_violation_step >= int(series.argmin())

    def test_rejects_short_series(self):
        with pytest.raises(ValueError):
            detect_violations(np.array([1.0]), 1e-12)


class TestQubitViolationScan:
    def test_fixed_point_start_never_violates(self):
        pert = PerturbationSpec(0.1)
        mean_occ = ensemble_thermal_state(QUBIT, pert).probs[0]
        grid = np.array([0.2, mean_occ, 0.99])
        result = qubit_violation_scan(QUBIT, pert, 0.1, 300, grid)
        assert not result.all_violated[0]
        assert not result.all_violated[1]
        assert result.all_violated[2]

    def test_ground_state_violates_everything(self):
        result = qubit_violation_scan(
            QUBIT, PerturbationSpec(0.1), 0.1, 300, np.array([0.5, 1.0]),
            alphas=(0.3, 0.5, 1.0, 2.0, 5.0, math.inf),
        )
        assert result.all_violated[1]
        assert not result.all_violated[0]

    def test_boundary_lands_between_mixed_and_bare_occupations(self):
        result = qubit_violation_scan(
            QUBIT, PerturbationSpec(0.01), 0.1, 800, np.linspace(0.0, 1.0, 200)
        )
        cell = 1.0 / 199.0
        assert result.boundary is not None
        assert result.mean_ground_occupation - cell < result.boundary <= result.ground_occupation
        assert result.ground_occupation == pytest.approx(0.880797, abs=1e-6)

    def test_rejects_qutrits(self):
        with pytest.raises(ValueError):
            qubit_violation_scan(QUTRIT, PerturbationSpec(0.1), 0.1, 10, np.array([0.1, 0.9]))

    def test_rejects_out_of_range_grid(self):
        with pytest.raises(ValueError):
            qubit_violation_scan(QUBIT, PerturbationSpec(0.1), 0.1, 10, np.array([0.1, 1.2]))

    def test_rejects_nonpositive_orders(self):
        with pytest.raises(ValueError):
            qubit_violation_scan(QUBIT, PerturbationSpec(0.1), 0.1, 10,
                                 np.array([0.1, 0.9]), alphas=(0.0, 1.0))


class TestSimplexEmbedding:
    def test_vertex_assignment(self):
        assert np.allclose(simplex_coords(DiagonalState.pure(3, 0)), [1.0, 0.0], atol=1e-15)
        assert np.allclose(simplex_coords(DiagonalState.pure(3, 1)), [0.0, 0.0], atol=1e-15)
        assert np.allclose(
            simplex_coords(DiagonalState.pure(3, 2)), [0.5, math.sqrt(3) / 2], atol=1e-15
        )

    def test_centroid(self):
        assert np.allclose(
            simplex_coords(DiagonalState.uniform(3)), [0.5, math.sqrt(3) / 6], atol=1e-15
        )

    def test_all_states_land_inside_triangle(self):
        rng = np.random.default_rng(23)
        probs = rng.dirichlet(np.ones(3), size=200)
        xy = simplex_path(probs)
        v0, v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 0.0]), np.array([0.5, math.sqrt(3) / 2])
        for edge_a, edge_b, opposite in ((v1, v0, v2), (v0, v2, v1), (v2, v1, v0)):
            edge = edge_b - edge_a
            cross = edge[0] * (xy - edge_a)[:, 1] - edge[1] * (xy - edge_a)[:, 0]
            side = edge[0] * (opposite - edge_a)[1] - edge[1] * (opposite - edge_a)[0]
            assert (cross * side >= -1e-12).all()

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ValueError):
            simplex_coords(DiagonalState.uniform(2))


class TestStraightness:
    def test_uniform_swap_paths_are_chords(self):
        rng = np.random.default_rng(29)
        tau = thermal_state(QUTRIT)
        for _ in range(5):
            initial = DiagonalState(rng.dirichlet(np.ones(3)))
            path = analytic_trajectory(initial, tau, 0.2, 120)
            assert straightness_deviation(path) < 1e-12

    def test_two_point_path(self):
        assert straightness_deviation(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])) == 0.0

    def test_constant_path(self):
        state = np.full((5, 3), 1.0 / 3.0)
        assert straightness_deviation(state) == 0.0

    def test_distinct_block_angles_bend_the_path(self):
        spec = EnergySpec(3, 2.0, 0.0)
        tau = thermal_state(spec)
        swap = BlockPartialSwap((0.0, 0.075, 0.05, 0.1, 0.0))
        state = DiagonalState.ground(3)
        states = [state.probs]
        for _ in range(300):
            state = collide(state, tau, swap)
            states.append(state.probs)
        assert straightness_deviation(np.array(states)) > 1e-3


class TestContourGrid:
    def test_lattice_size_and_membership(self):
        grid = contour_grid(EnergySpec(3, 2.0, 0.75), (1.0,), 12)
        assert grid.probs.shape == (13 * 14 // 2, 3)
        assert np.abs(grid.probs.sum(axis=1) - 1.0).max() < 1e-12
        assert grid.points.shape == grid.probs.shape[:1] + (2,)

    def test_minimum_sits_at_thermal_state(self):
        spec = EnergySpec(3, 2.0, 0.75)
        grid = contour_grid(spec, (0.5, 1.0, 2.0, math.inf), 40)
        tau = thermal_state(spec).probs
        nearest = np.linalg.norm(grid.probs - tau, axis=1).argmin()
        spacing = math.sqrt(2.0) / 40
        for col, alpha in enumerate(grid.alphas):
            best = grid.values[:, col].argmin()
            if math.isinf(alpha):
                # max-ratio level sets are polygonal; the lattice argmin can
                # sit one node away from the Euclidean-nearest one
                assert np.linalg.norm(grid.probs[best] - grid.probs[nearest]) <= spacing + 1e-12
            else:
                assert best == nearest

    def test_infinite_temperature_grid_is_permutation_symmetric(self):
        grid = contour_grid(EnergySpec(3, 2.0, 0.0), (0.5, 1.0, math.inf), 15)
        assert grid.value_kind == "divergence"
        table = {tuple(np.round(p, 12)): v for p, v in zip(grid.probs, grid.values)}
        rng = np.random.default_rng(31)
        for _ in range(50):
            p = grid.probs[rng.integers(len(grid.probs))]
            shuffled = tuple(np.round(p[[2, 0, 1]], 12))
            assert np.allclose(table[shuffled], table[tuple(np.round(p, 12))], atol=1e-12)

    def test_low_temperature_minimum_moves_to_ground_corner(self):
        grid = contour_grid(EnergySpec(3, 2.0, 0.75), (1.0,), 30)
        best = grid.probs[grid.values[:, 0].argmin()]
        assert best[0] > 0.6

    def test_boundary_values_follow_order_conventions(self):
        grid = contour_grid(EnergySpec(3, 2.0, 0.75), (0.5, 1.0, 2.0, math.inf), 6)
        assert np.isfinite(grid.values).all()
        negative = contour_grid(EnergySpec(3, 2.0, 0.75), (-0.5,), 6)
        boundary = (negative.probs == 0).any(axis=1)
        assert np.isinf(negative.values[boundary, 0]).all()
        assert np.isfinite(negative.values[~boundary, 0]).all()

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            contour_grid(QUBIT, (1.0,), 10)
        with pytest.raises(ValueError):
            contour_grid(QUTRIT, (1.0,), 1)


class TestContourFollower:
    def test_matched_top_level_keeps_max_divergence_flat(self):
        pert = PerturbationSpec(0.1)
        mean_thermal = ensemble_thermal_state(QUTRIT, pert)
        tau = thermal_state(QUTRIT)
        top = mean_thermal.probs[2]
        initial = DiagonalState(np.array([1.0 - top - 0.01, 0.01, top]))
        path = analytic_trajectory(initial, mean_thermal, 0.1, 300)
        assert ((path / tau.probs).argmax(axis=1) == 2).all()
        flat = divergence_rows(path, tau, math.inf)
        assert flat.max() - flat.min() < 1e-9
        for alpha in (0.5, 1.0, 2.0):
            series = divergence_rows(path, tau, alpha)
            assert detect_violations(series, 1e-10).violated
