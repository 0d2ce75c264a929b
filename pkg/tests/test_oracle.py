import math

import numpy as np
import pytest

from cvmc import (
    FiniteJointDistribution,
    MomentAccumulator,
    brute_force_cv_variance,
    exact_moments,
    run_inequality_trials,
    correlation_inequality_check,
)
from cvmc.oracle import random_independent_trial, random_joint_law


def two_point_yv():
    # (Y,V) in {(0,0),(2,1)} with equal probability
    return FiniteJointDistribution.from_atoms(
        ("Y", "V"), [[0.0, 0.0], [2.0, 1.0]], [0.5, 0.5]
    )


class TestFiniteJointDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            FiniteJointDistribution.from_atoms(("Y",), np.empty((0, 1)), [])
        with pytest.raises(ValueError):
            FiniteJointDistribution.from_atoms(("Y",), [[1.0], [2.0]], [0.6, 0.6])
        with pytest.raises(ValueError):
            FiniteJointDistribution.from_atoms(("Y",), [[1.0], [2.0]], [1.2, -0.2])
        with pytest.raises(ValueError):
            FiniteJointDistribution.from_atoms(("Y", "V"), [[1.0], [2.0]], [0.5, 0.5])

    def test_product_construction(self):
        dist = FiniteJointDistribution.independent(
            [([0.0, 1.0], [0.5, 0.5]), ([-1.0, 2.0], [0.25, 0.75])]
        )
        assert dist.names == ("X1", "X2")
        assert dist.outcomes.shape == (4, 2)
        assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-15)
        # marginal of X2 recovered by summing over X1
        p_x2 = {v: 0.0 for v in (-1.0, 2.0)}
        for row, p in zip(dist.outcomes, dist.probabilities):
            p_x2[row[1]] += p
        assert p_x2[-1.0] == pytest.approx(0.25, abs=1e-15)

    def test_with_target_prepends_function(self):
        base = FiniteJointDistribution.independent([([0.0, 1.0], [0.5, 0.5])])
        dist = base.with_target(lambda row: 3.0 * row[0] + 1.0)
        assert dist.names == ("Y", "X1")
        assert dist.outcomes[:, 0].tolist() == [1.0, 4.0]

    def test_sampling_spot_checks_exact_moments(self):
        dist = two_point_yv()
        moments = dist.moments()
        draws = dist.sample(200_000, np.random.default_rng(11))
        se_mean = math.sqrt(moments.variance(0) / draws.shape[0])
        assert abs(draws[:, 0].mean() - moments.mean[0]) < 4 * se_mean
        sample_cov = np.cov(draws.T, ddof=1)[0, 1]
        assert sample_cov == pytest.approx(moments.covariance[0, 1], abs=0.02)


class TestExactMoments:
    def test_two_point_law(self):
        m = exact_moments(two_point_yv())
        assert m.mean.tolist() == [1.0, 0.5]
        assert m.covariance[0, 1] == pytest.approx(0.5, abs=1e-15)
        assert m.correlation(0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_independent_product_has_zero_cross_covariance(self):
        dist = FiniteJointDistribution.independent(
            [([0.1, 0.9, -0.3], [0.2, 0.5, 0.3]), ([-1.0, 2.0], [0.6, 0.4]), ([0.0, 5.0], [0.9, 0.1])]
        )
        cov = exact_moments(dist).covariance
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert abs(cov[i, j]) < 1e-12

    def test_single_atom_has_zero_variance(self):
        dist = FiniteJointDistribution.from_atoms(("Y", "V"), [[3.0, -2.0]], [1.0])
        m = exact_moments(dist)
        assert m.variance(0) == 0.0
        assert m.variance(1) == 0.0
        with pytest.raises(ValueError):
            m.correlation(0, 1)

    def test_matches_streaming_accumulator_on_expanded_sample(self):
        # replicate atoms by probability weight and feed the estimator-side
        # accumulator: correlations must agree with exact enumeration
        dist = FiniteJointDistribution.from_atoms(
            ("Y", "V"),
            [[0.0, 1.0], [1.0, -1.0], [2.0, 0.5], [-1.0, 0.25]],
            [0.125, 0.25, 0.5, 0.125],
        )
        rows = []
        for row, p in zip(dist.outcomes, dist.probabilities):
            rows.extend([row] * int(round(p * 8)))
        acc = MomentAccumulator(2)
        acc.add_batch(np.array(rows))
        exact = exact_moments(dist)
        assert np.allclose(acc.mean, exact.mean, rtol=1e-14)
        assert acc.correlation(0, 1) == pytest.approx(exact.correlation(0, 1), rel=1e-12)


class TestInequality:
    def test_self_correlation_equality(self):
        dist = FiniteJointDistribution.independent(
            [([-1.0, 1.0], [0.5, 0.5]), ([0.0, 3.0], [0.7, 0.3])]
        ).with_target(lambda row: row[0])
        check = correlation_inequality_check(dist, [1.0, 0.0])
        assert check.lhs == pytest.approx(1.0, abs=1e-12)
        assert check.rhs == pytest.approx(1.0, abs=1e-12)
        assert check.holds

    def test_sum_of_two_equal_variance_variables(self):
        dist = FiniteJointDistribution.independent(
            [([-1.0, 1.0], [0.5, 0.5]), ([-1.0, 1.0], [0.5, 0.5])]
        ).with_target(lambda row: row[0] + row[1])
        check = correlation_inequality_check(dist, [1.0, 1.0])
        assert check.lhs == pytest.approx(1.0, abs=1e-12)
        assert check.rhs == pytest.approx(0.5 + 0.5, abs=1e-12)
        assert check.holds

    def test_randomized_trials_all_hold(self):
        summary = run_inequality_trials(300, seed=17)
        assert summary.passes == summary.trials == 300
        assert summary.max_violation <= 1e-12

    def test_trials_deterministic_given_seed(self):
        a = run_inequality_trials(25, seed=19)
        b = run_inequality_trials(25, seed=19)
        assert a == b

    def test_dependent_variables_can_violate_the_bound(self):
        # X1 = Z, X2 = U - Z with Z, U independent signs; Y = U = X1 + X2.
        # Y is uncorrelated with X1 and only partially correlated with X2,
        # yet perfectly correlated with their sum: the checker must report
        # the violation rather than assume independence.
        atoms = []
        for z in (-1.0, 1.0):
            for u in (-1.0, 1.0):
                atoms.append([u, z, u - z])
        dist = FiniteJointDistribution.from_atoms(("Y", "X1", "X2"), atoms, [0.25] * 4)
        check = correlation_inequality_check(dist, [1.0, 1.0])
        assert check.lhs == pytest.approx(1.0, abs=1e-12)
        assert check.rhs == pytest.approx(0.5, abs=1e-12)
        assert not check.holds

    def test_degenerate_inputs_rejected(self):
        dist = FiniteJointDistribution.independent(
            [([-1.0, 1.0], [0.5, 0.5]), ([-1.0, 1.0], [0.5, 0.5])]
        ).with_target(lambda row: row[0])
        with pytest.raises(ValueError):
            correlation_inequality_check(dist, [1.0])  # wrong weight count
        with pytest.raises(ValueError):
            correlation_inequality_check(dist, [0.0, 0.0])  # zero-variance combination
        constant_y = FiniteJointDistribution.independent(
            [([-1.0, 1.0], [0.5, 0.5])]
        ).with_target(lambda row: 7.0)
        with pytest.raises(ValueError):
            correlation_inequality_check(constant_y, [1.0])

    def test_random_trial_generator_shape(self):
        dist, alpha = random_independent_trial(np.random.default_rng(23))
        assert dist.names[0] == "Y"
        assert dist.n_variables == 4
        assert alpha.shape == (3,)
        assert np.all(np.abs(alpha) <= 2.0)


class TestBruteForceVariance:
    def test_zero_coefficient_returns_var_y(self):
        dist = two_point_yv()
        assert brute_force_cv_variance(dist, 0.0) == exact_moments(dist).variance(0)

    def test_matches_quadratic_expansion(self):
        rng = np.random.default_rng(29)
        for _ in range(25):
            dist = random_joint_law(rng)
            m = exact_moments(dist)
            c = float(rng.uniform(-3, 3))
            expansion = (
                m.variance(0) + c**2 * m.variance(1) + 2 * c * m.covariance[0, 1]
            )
            assert brute_force_cv_variance(dist, c) == pytest.approx(expansion, abs=1e-12)

    def test_optimal_coefficient_attains_predicted_minimum(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            dist = random_joint_law(rng)
            m = exact_moments(dist)
            c_star = -m.covariance[0, 1] / m.variance(1)
            at_optimum = brute_force_cv_variance(dist, c_star)
            predicted = m.variance(0) * (1.0 - m.correlation(0, 1) ** 2)
            assert at_optimum == pytest.approx(predicted, abs=1e-12)
            # strict convexity away from the optimum
            if abs(m.correlation(0, 1)) < 1 - 1e-9:
                assert brute_force_cv_variance(dist, c_star + 0.1) > at_optimum
                assert brute_force_cv_variance(dist, c_star - 0.1) > at_optimum

    def test_joint_minimization_identity_on_independent_variables(self):
        # minimizing over all betas at once reproduces 1 - sum corr^2 exactly
        rng = np.random.default_rng(37)
        for _ in range(25):
            dist, _ = random_independent_trial(rng)
            m = exact_moments(dist)
            cov_xx = m.covariance[1:, 1:]
            cov_yx = m.covariance[0, 1:]
            betas = np.linalg.solve(cov_xx, -cov_yx)
            var_w = m.variance(0) + betas @ cov_xx @ betas + 2 * betas @ cov_yx
            ratio = var_w / m.variance(0)
            sum_corr_sq = float(np.sum(cov_yx**2 / (m.variance(0) * np.diag(cov_xx))))
            assert ratio == pytest.approx(1.0 - sum_corr_sq, abs=1e-12)
