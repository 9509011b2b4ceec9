import math

import numpy as np
import pytest

from thermops import (
    DiagonalState,
    DivergentInputError,
    EnergySpec,
    UndefinedTemperatureError,
    UnsupportedReferenceError,
    UniformPartialSwap,
    collide,
    divergence_profile,
    free_energy,
    log_partition,
    renyi_divergence,
    thermal_state,
)

QUBIT = EnergySpec(2, 2.0, 1.0)
QUTRIT = EnergySpec(3, 2.0, 1.0)
ALPHAS = (0.0, 0.3, 0.5, 1.0, 2.0, 5.0, math.inf)


def kl_oracle(p, q):
    return sum(pj * math.log(pj / qj) for pj, qj in zip(p, q) if pj > 0)


def renyi_oracle(p, q, alpha):
    # Plain-text transcription of the definition; no stabilisation.
    total = sum(pj**alpha * qj ** (1.0 - alpha) for pj, qj in zip(p, q))
    return math.copysign(1.0, alpha) / (alpha - 1.0) * math.log(total)


def random_state(rng, d):
    return DiagonalState(rng.dirichlet(np.ones(d)))


class TestExactValues:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_zero_on_identical_states(self, alpha):
        tau = thermal_state(QUBIT)
        assert abs(renyi_divergence(tau, tau, alpha)) < 1e-12

    @pytest.mark.parametrize("alpha", (0.5, 1.0, 2.0, 10.0, math.inf))
    @pytest.mark.parametrize("spec", (QUBIT, QUTRIT))
    def test_pure_state_collapse(self, spec, alpha):
        tau = thermal_state(spec)
        for j in range(spec.d):
            pure = DiagonalState.pure(spec.d, j)
            assert renyi_divergence(pure, tau, alpha) == pytest.approx(
                -math.log(tau.probs[j]), abs=1e-12
            )

    def test_kl_against_hand_loop(self):
        p = DiagonalState(np.array([0.9, 0.1]))
        tau = thermal_state(QUBIT)
        value = renyi_divergence(p, tau, 1.0)
        assert value == pytest.approx(kl_oracle(p.probs, tau.probs), abs=1e-14)
        assert value == pytest.approx(0.0018450376515244393, abs=1e-12)

    @pytest.mark.parametrize("alpha", (0.3, 0.6, 2.0, 4.0, -0.5))
    def test_interior_orders_against_naive_formula(self, alpha):
        rng = np.random.default_rng(31)
        for d in (2, 3, 4):
            p, q = random_state(rng, d), random_state(rng, d)
            assert renyi_divergence(p, q, alpha) == pytest.approx(
                renyi_oracle(p.probs, q.probs, alpha), abs=1e-11
            )

    def test_order_zero_full_support_vanishes(self):
        rng = np.random.default_rng(5)
        p, q = random_state(rng, 3), random_state(rng, 3)
        assert abs(renyi_divergence(p, q, 0.0)) < 1e-12

    def test_order_zero_restricted_support(self):
        p = DiagonalState(np.array([0.4, 0.6, 0.0]))
        q = thermal_state(QUTRIT)
        expected = -math.log(q.probs[0] + q.probs[1])
        assert renyi_divergence(p, q, 0.0) == pytest.approx(expected, abs=1e-14)


class TestLimitsAndRouting:
    def test_window_routes_to_kl(self):
        rng = np.random.default_rng(9)
        p, q = random_state(rng, 3), random_state(rng, 3)
        kl = renyi_divergence(p, q, 1.0)
        assert renyi_divergence(p, q, 1.0 + 1e-10) == kl
        assert renyi_divergence(p, q, 1.0 - 1e-10) == kl

    def test_near_one_consistency(self):
        rng = np.random.default_rng(10)
        p, q = random_state(rng, 3), random_state(rng, 3)
        kl = renyi_divergence(p, q, 1.0)
        assert renyi_divergence(p, q, 1.0 + 1e-6) == pytest.approx(kl, abs=1e-5)
        assert renyi_divergence(p, q, 1.0 - 1e-6) == pytest.approx(kl, abs=1e-5)

    def test_large_order_approaches_max_ratio(self):
        # The finite-order gap is |ln p_j*| / (alpha - 1) at the dominant
        # ratio level j*, so give that level solid weight.
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = random_state(rng, 3)
            peak = int(q.probs.argmin())
            p = DiagonalState(0.5 * np.eye(3)[peak] + 0.5 * q.probs)
            assert renyi_divergence(p, q, 1e3) == pytest.approx(
                renyi_divergence(p, q, math.inf), abs=1e-3
            )

    def test_order_tends_to_max_ratio_branch(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            p, q = random_state(rng, 3), random_state(rng, 3)
            limit = renyi_divergence(p, q, math.inf)
            gaps = [abs(renyi_divergence(p, q, a) - limit) for a in (1e2, 1e3, 1e4)]
            assert gaps[2] < gaps[1] < gaps[0] + 1e-15
            assert gaps[2] < 1e-3

    def test_monotone_in_order(self):
        rng = np.random.default_rng(12)
        grid = (0.0, 0.2, 0.5, 0.9, 1.0, 1.5, 3.0, 8.0, math.inf)
        for _ in range(20):
            p, q = random_state(rng, 3), random_state(rng, 3)
            values = [renyi_divergence(p, q, a) for a in grid]
            assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))

    def test_scale_ordering(self):
        rng = np.random.default_rng(13)
        p, q = random_state(rng, 4), random_state(rng, 4)
        d0 = renyi_divergence(p, q, 0.0)
        d1 = renyi_divergence(p, q, 1.0)
        dinf = renyi_divergence(p, q, math.inf)
        assert dinf >= d1 >= d0 >= -1e-15

    def test_data_processing_under_noiseless_collisions(self):
        rng = np.random.default_rng(14)
        swap = UniformPartialSwap(0.1)
        for spec in (QUBIT, QUTRIT):
            tau = thermal_state(spec)
            state = random_state(rng, spec.d)
            mixed = collide(state, tau, swap)
            for alpha in ALPHAS:
                assert renyi_divergence(mixed, tau, alpha) \
                    <= renyi_divergence(state, tau, alpha) + 1e-12


class TestErrors:
    def test_reference_needs_full_support(self):
        p = DiagonalState(np.array([0.5, 0.5]))
        hollow = DiagonalState(np.array([1.0, 0.0]))
        with pytest.raises(UnsupportedReferenceError):
            renyi_divergence(p, hollow, 2.0)

    def test_negative_order_needs_full_support(self):
        hollow = DiagonalState(np.array([1.0, 0.0]))
        tau = thermal_state(QUBIT)
        with pytest.raises(DivergentInputError):
            renyi_divergence(hollow, tau, -0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            renyi_divergence(DiagonalState.uniform(2), thermal_state(QUTRIT), 1.0)

    def test_rejects_nan_order(self):
        with pytest.raises(ValueError):
            renyi_divergence(DiagonalState.uniform(2), thermal_state(QUBIT), math.nan)


class TestFreeEnergy:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_thermal_state_baseline(self, alpha):
        tau = thermal_state(QUBIT)
        expected = -log_partition(QUBIT) / QUBIT.beta
        assert free_energy(tau, QUBIT, alpha) == pytest.approx(expected, abs=1e-12)

    def test_pure_ground_equals_ground_energy(self):
        # D(ground) = -ln q0 and ln Z = beta*|E0| + ln(1 + e^{-beta g0}),
        # so the free energy of the ground level is its energy, here -1.
        value = free_energy(DiagonalState.ground(2), QUBIT, 1.0)
        assert value == pytest.approx(-1.0, abs=1e-12)
        for alpha in (0.5, 2.0, math.inf):
            assert free_energy(DiagonalState.ground(2), QUBIT, alpha) == pytest.approx(value, abs=1e-12)

    def test_offset_identity(self):
        rng = np.random.default_rng(21)
        state = random_state(rng, 3)
        tau = thermal_state(QUTRIT)
        for alpha in (0.5, 1.0, 2.0, math.inf):
            gap = free_energy(state, QUTRIT, alpha) - free_energy(tau, QUTRIT, alpha)
            assert gap == pytest.approx(
                renyi_divergence(state, tau, alpha) / QUTRIT.beta, abs=1e-12
            )

    def test_undefined_at_infinite_temperature(self):
        with pytest.raises(UndefinedTemperatureError):
            free_energy(DiagonalState.uniform(2), EnergySpec(2, 2.0, 0.0), 1.0)


class TestProfile:
    def test_matches_individual_calls(self):
        rng = np.random.default_rng(22)
        p, q = random_state(rng, 3), random_state(rng, 3)
        alphas = [0.0, 0.5, 1.0, 2.0, math.inf]
        profile = divergence_profile(p, q, alphas)
        singles = [renyi_divergence(p, q, a) for a in alphas]
        assert np.array_equal(profile, singles)

    def test_trivial_cases(self):
        tau = thermal_state(QUBIT)
        assert np.allclose(divergence_profile(tau, tau, [0.0, 1.0, math.inf]), 0.0, atol=1e-12)
        p = DiagonalState(np.array([0.6, 0.4]))
        assert divergence_profile(p, tau, [2.0])[0] == renyi_divergence(p, tau, 2.0)

    def test_identifies_offending_order(self):
        hollow = DiagonalState(np.array([1.0, 0.0]))
        tau = thermal_state(QUBIT)
        with pytest.raises(DivergentInputError, match="-0.5"):
            divergence_profile(hollow, tau, [1.0, -0.5])
