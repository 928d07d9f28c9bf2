"""Hard-thresholded estimation: zero-pattern recovery, branch decisions,
and adaptively estimated bounds."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_nonsingular
from waldkit import ratmat, rng
from waldkit.adaptive import (
    BRANCH_DIVERGENT,
    BRANCH_ESTIMATED,
    BRANCH_STANDARD,
    AdaptiveConfig,
    adaptive_analyze,
    adaptive_bound,
    estimate_k,
    threshold_coefficients,
)
from waldkit.cldr import DEFICIENT_RANK, analyze_at
from waldkit.errors import DivergentLawError, RankDeficiencyError
from waldkit.gallery import (
    power_pair_restriction,
    product_restriction,
    sphere_restriction,
    square_restriction,
)
from waldkit.limitlaw import ks_distance
from waldkit.poly import POS_INFINITY, Polynomial
from waldkit.polymatrix import jacobian, poly_det
from waldkit.restrictions import parse_system


def simulated_estimate(system, theta_bar, lambda_T, seed, rep):
    """One draw of theta_hat = theta_bar + Z / lambda_T (V = I)."""
    z = rng.normal_matrix(seed, rep + 1, system.p)[rep]
    return tuple(float(t) + float(x) / lambda_T for t, x in zip(theta_bar, z))


class TestThresholding:
    def test_small_coefficient_zeroed(self):
        cfg = AdaptiveConfig(lambda_T=100.0, c=1.0, delta=0.5)  # threshold 0.1
        poly = Polynomial(1, {(1,): Fraction(1, 1000)})
        assert threshold_coefficients(poly, cfg).is_zero()

    def test_large_coefficient_kept_exactly(self):
        cfg = AdaptiveConfig(lambda_T=100.0, c=1.0, delta=0.5)
        poly = Polynomial(1, {(1,): Fraction(1, 2)})
        assert threshold_coefficients(poly, cfg) == poly

    def test_exact_zero_stays_zero(self):
        for cfg in (
            AdaptiveConfig(lambda_T=10.0),
            AdaptiveConfig(lambda_T=1e8, c=5.0, delta=0.9),
        ):
            assert threshold_coefficients(Polynomial.zero(2), cfg).is_zero()

    def test_threshold_value(self):
        cfg = AdaptiveConfig(lambda_T=100.0, c=1.0, delta=0.5)
        assert cfg.threshold == pytest.approx(0.1)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdaptiveConfig(lambda_T=100.0, delta=1.0)
        with pytest.raises(ValueError):
            AdaptiveConfig(lambda_T=100.0, c=0.0)
        with pytest.raises(ValueError):
            AdaptiveConfig(lambda_T=0.0)


class TestEstimateK:
    def test_all_above_threshold_recovers_lowest_order(self):
        cfg = AdaptiveConfig(lambda_T=1000.0)
        poly = Polynomial(2, {(1, 0): 2, (0, 2): 3})
        assert estimate_k(threshold_coefficients(poly, cfg)) == 1

    def test_all_below_threshold_is_infinite(self):
        cfg = AdaptiveConfig(lambda_T=1000.0)
        poly = Polynomial(2, {(1, 0): Fraction(1, 10**9)})
        assert estimate_k(threshold_coefficients(poly, cfg)) == POS_INFINITY

    def test_product_jacobian_entry_recovered_in_simulation(self):
        # theta_hat near the origin: the constant term of the shifted entry
        # is noise of size 1/lambda_T and must be zeroed, leaving order 1.
        system = product_restriction((0, 0))
        lam = 1000.0
        cfg = AdaptiveConfig(lambda_T=lam)
        hits = 0
        reps = 500
        z = rng.normal_matrix(211, reps, 2)
        for i in range(reps):
            theta_hat = tuple(Fraction(float(v) / lam) for v in z[i])
            shifted = system.shifted(theta_hat)
            entry = jacobian(shifted)[0, 0]  # t2 + noise constant
            k_hat = estimate_k(threshold_coefficients(entry, cfg))
            hits += k_hat == 1
        assert hits / reps >= 0.99


class TestBranches:
    def test_standard_branch_off_axis(self):
        system = product_restriction((1, 0))
        theta_hat = simulated_estimate(system, (1.0, 0.0), 1000.0, 41, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        assert verdict.branch == BRANCH_STANDARD
        assert verdict.k_hat_det == 0

    def test_divergent_branch_off_axis_pair(self):
        system = power_pair_restriction((0, 1))
        theta_hat = simulated_estimate(system, (0.0, 1.0), 1000.0, 43, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        assert verdict.branch == BRANCH_DIVERGENT
        assert verdict.analysis.classification == DEFICIENT_RANK

    def test_estimated_limit_branch_at_origin(self):
        system = power_pair_restriction((0, 0))
        theta_hat = simulated_estimate(system, (0.0, 0.0), 1000.0, 47, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        assert verdict.branch == BRANCH_ESTIMATED
        assert verdict.alpha_hat == (1, 2)

    def test_estimated_law_matches_direct_draw_oracle(self):
        # At the origin the true limit is Z1^2/4 + Z2^2/16.
        system = power_pair_restriction((0, 0))
        theta_hat = simulated_estimate(system, (0.0, 0.0), 1000.0, 53, 0)
        verdict = adaptive_analyze(
            system,
            theta_hat,
            np.eye(2),
            AdaptiveConfig(lambda_T=1000.0),
            draws=30_000,
            seed=55,
        )
        z = rng.normal_matrix(56, 30_000, 2)
        direct = z[:, 0] ** 2 / 4.0 + z[:, 1] ** 2 / 16.0
        assert ks_distance(verdict.law, direct) < 0.02

    def test_row_annihilation_diagnostic(self):
        system = parse_system("p=1 q=1\n1/1000000*t1^2\n")
        with pytest.raises(RankDeficiencyError):
            adaptive_analyze(
                system, (1e-4,), np.eye(1), AdaptiveConfig(lambda_T=1000.0)
            )

    def test_branch_matches_oracle_over_replications(self):
        cases = [
            (product_restriction((1, 0)), (1.0, 0.0), BRANCH_STANDARD),
            (power_pair_restriction((0, 0)), (0.0, 0.0), BRANCH_ESTIMATED),
            (power_pair_restriction((0, 1)), (0.0, 1.0), BRANCH_DIVERGENT),
        ]
        lam = 1000.0
        cfg = AdaptiveConfig(lambda_T=lam)
        for system, truth, expected in cases:
            z = rng.normal_matrix(61, 50, system.p)
            hits = 0
            for i in range(50):
                theta_hat = tuple(
                    float(t) + float(v) / lam for t, v in zip(truth, z[i])
                )
                verdict = adaptive_analyze(system, theta_hat, np.eye(2), cfg)
                hits += verdict.branch == expected
            assert hits >= 49


class TestAdaptiveBound:
    def test_standard_branch_keeps_reference(self):
        system = product_restriction((1, 0))
        theta_hat = simulated_estimate(system, (1.0, 0.0), 1000.0, 67, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        bound = adaptive_bound(verdict)
        assert bound.scale == 1 and bound.alpha == 0

    def test_square_restriction_quarter_bound(self):
        system = square_restriction()
        theta_hat = simulated_estimate(system, (0.0,), 1000.0, 71, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(1), AdaptiveConfig(lambda_T=1000.0)
        )
        assert verdict.branch == BRANCH_ESTIMATED
        assert verdict.alpha_hat == (1,)
        bound = adaptive_bound(verdict)
        assert bound.scale == Fraction(1, 4) and bound.p == 1

    def test_power_pair_quarter_bound_in_two_dimensions(self):
        system = power_pair_restriction((0, 0))
        theta_hat = simulated_estimate(system, (0.0, 0.0), 1000.0, 73, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        bound = adaptive_bound(verdict)
        assert bound.scale == Fraction(1, 4) and bound.p == 2

    def test_divergent_branch_has_no_bound(self):
        system = power_pair_restriction((0, 1))
        theta_hat = simulated_estimate(system, (0.0, 1.0), 1000.0, 79, 0)
        verdict = adaptive_analyze(
            system, theta_hat, np.eye(2), AdaptiveConfig(lambda_T=1000.0)
        )
        with pytest.raises(DivergentLawError):
            adaptive_bound(verdict)


class TestSubstitutionIndependence:
    def test_k_hat_det_invariant_under_rational_substitution(self):
        # Replications where both variants recover the true order agree.
        system = power_pair_restriction((0, 0))
        truth_shifted, _ = analyze_at(system)
        true_k = int(
            poly_det(
                jacobian(truth_shifted) @ jacobian(truth_shifted).transpose()
            ).lowest_order()
        )
        lam = 1000.0
        cfg = AdaptiveConfig(lambda_T=lam)
        rand = random.Random(83)
        z = rng.normal_matrix(89, 20, 2)
        both_right = 0
        for i in range(20):
            theta_hat = tuple(float(v) / lam for v in z[i])
            recentered = system.shifted(
                tuple(Fraction(x) for x in theta_hat)
            )
            base = jacobian(recentered)
            a = random_nonsingular(rand, 2)
            substituted = base.affine_substitute(a).right_mul_constant(
                ratmat.inverse(a)
            )
            k_base = estimate_k(
                threshold_coefficients(
                    poly_det(base @ base.transpose()), cfg
                )
            )
            k_sub = estimate_k(
                threshold_coefficients(
                    poly_det(substituted @ substituted.transpose()), cfg
                )
            )
            if k_base == true_k and k_sub == true_k:
                both_right += 1
                assert k_base == k_sub
        assert both_right >= 19
