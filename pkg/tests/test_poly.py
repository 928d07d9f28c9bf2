"""Exact polynomial arithmetic, calculus and structure operations."""

import math
import random
from fractions import Fraction

import pytest

from helpers import random_nonsingular, random_point, random_polynomial
from waldkit import ratmat
from waldkit.poly import (
    EXACT,
    FLOAT,
    NEG_INFINITY,
    POS_INFINITY,
    Polynomial,
    monomial_exponents,
)
from waldkit.restrictions import parse_polynomial

T1, T2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)


def brute_force_evaluate(poly, point):
    """Independent naive term summation used as the evaluation oracle."""
    total = Fraction(0)
    for exponents, coeff in poly.terms():
        term = coeff
        for x, e in zip(point, exponents):
            term *= x**e
        total += term
    return total


class TestArithmetic:
    def test_difference_of_squares(self):
        assert (T1 + T2) * (T1 - T2) == T1 * T1 - T2 * T2

    def test_additive_inverse_cancels(self):
        poly = parse_polynomial("3*t1^2*t2 - 1/2*t2 + 7", 2)
        assert (poly + (-1) * poly).is_zero()

    def test_degree_is_additive_under_multiplication(self):
        product = (T1 * T2) * (T1 * T2)
        assert product == parse_polynomial("t1^2*t2^2", 2)
        assert product.degree() == 4

    def test_zero_polynomial_sentinels(self):
        zero = Polynomial.zero(3)
        assert zero.degree() == NEG_INFINITY
        assert zero.lowest_order() == POS_INFINITY

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            T1 + Polynomial.variable(3, 0)

    def test_field_mismatch_rejected(self):
        with pytest.raises(ValueError):
            T1 + T1.to_float()

    def test_float_coefficient_rejected_in_exact_mode(self):
        with pytest.raises(TypeError):
            Polynomial(1, {(1,): 0.5})

    def test_random_products_match_naive_expansion(self):
        rng = random.Random(11)
        for _ in range(30):
            a = random_polynomial(rng, 2, 3)
            b = random_polynomial(rng, 2, 3)
            point = random_point(rng, 2)
            assert (a * b).evaluate(point) == a.evaluate(point) * b.evaluate(point)


class TestDifferentiate:
    def test_product_rule_example(self):
        assert (T1 * T2).differentiate(0) == T2

    def test_square_derivative(self):
        t = Polynomial.variable(1, 0)
        assert (t * t).differentiate(0) == 2 * t

    def test_constant_derivative_is_zero(self):
        assert Polynomial.constant(2, 5).differentiate(0).is_zero()

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            T1.differentiate(2)

    def test_linearity(self):
        rng = random.Random(23)
        for _ in range(25):
            a, b = random_polynomial(rng, 3, 4), random_polynomial(rng, 3, 4)
            ca, cb = Fraction(3, 2), Fraction(-2, 5)
            j = rng.randrange(3)
            assert (ca * a + cb * b).differentiate(j) == (
                ca * a.differentiate(j) + cb * b.differentiate(j)
            )


class TestEvaluate:
    def test_product_at_point(self):
        assert (T1 * T2).evaluate((2, 3)) == 6

    def test_sphere_vanishes_at_origin(self):
        sphere = parse_polynomial("t1^2 + t2^2 + t3^2", 3)
        assert sphere.evaluate((0, 0, 0)) == 0

    def test_matches_brute_force_oracle_exactly(self):
        rng = random.Random(7)
        for _ in range(50):
            poly = random_polynomial(rng, 3, 4)
            point = random_point(rng, 3)
            assert poly.evaluate(point) == brute_force_evaluate(poly, point)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            T1.evaluate((1,))


class TestHomogeneousStructure:
    def test_shifted_square_component(self):
        # (3 + t2)^2 expands to 9 + 6 t2 + t2^2.
        poly = parse_polynomial("(3 + t2)^2", 2)
        assert poly.homogeneous_component(1) == 6 * T2
        assert poly.homogeneous_component(0) == Polynomial.constant(2, 9)

    def test_component_above_degree_is_zero(self):
        assert (T1 * T2).homogeneous_component(5).is_zero()

    def test_homogeneous_polynomial_single_component(self):
        poly = parse_polynomial("t1^2*t2 + t2^3", 2)
        assert poly.homogeneous_component(3) == poly
        for k in (0, 1, 2, 4):
            assert poly.homogeneous_component(k).is_zero()

    def test_reconstruction(self):
        rng = random.Random(31)
        for _ in range(30):
            poly = random_polynomial(rng, 3, 5)
            total = Polynomial.zero(3)
            deg = poly.degree()
            if deg == NEG_INFINITY:
                continue
            for k in range(int(deg) + 1):
                total = total + poly.homogeneous_component(k)
            assert total == poly

    def test_homogeneity_scaling(self):
        rng = random.Random(37)
        form = parse_polynomial("t1^2*t2 - 2*t2^3 + 1/2*t1*t2^2", 2)
        k = 3
        for _ in range(100):
            point = random_point(rng, 2)
            lam = random_rational_nonzero(rng)
            scaled = tuple(lam * x for x in point)
            assert form.evaluate(scaled) == lam**k * form.evaluate(point)


def random_rational_nonzero(rng):
    value = Fraction(rng.randint(1, 9), rng.randint(1, 4))
    return -value if rng.random() < 0.5 else value


class TestLowestOrderAndLeadingForm:
    def test_zero_polynomial_has_infinite_order(self):
        assert Polynomial.zero(4).lowest_order() == POS_INFINITY

    def test_linear_term(self):
        assert (2 * T1).lowest_order() == 1

    def test_nonzero_constant_term_gives_order_zero(self):
        assert parse_polynomial("(3 + t2)^2", 2).lowest_order() == 0

    def test_leading_form_drops_higher_terms(self):
        t = Polynomial.variable(1, 0)
        assert (t**2 + t**3).leading_form() == t**2

    def test_leading_form_of_shifted_square_is_constant(self):
        poly = parse_polynomial("(3 + t2)^2", 2)
        assert poly.leading_form() == Polynomial.constant(2, 9)

    def test_leading_form_of_zero_rejected(self):
        with pytest.raises(ValueError):
            Polynomial.zero(2).leading_form()

    def test_scaling_limit_numeric(self):
        rng = random.Random(41)
        lam = 10**6
        for _ in range(20):
            poly = random_polynomial(rng, 2, 4, allow_zero=False)
            lead = poly.leading_form()
            k = int(poly.lowest_order())
            point = random_point(rng, 2)
            scaled = float(
                Fraction(lam) ** k * poly.evaluate(tuple(x / lam for x in point))
            )
            expected = float(lead.evaluate(point))
            assert abs(scaled - expected) <= 1e-4 * max(1.0, abs(expected))

    def test_scaling_limit_exact_bound(self):
        # |lam^k P(y/lam) - lead(y)| <= C(y)/lam with C the sum of absolute
        # values of the higher homogeneous components at y.
        rng = random.Random(43)
        for _ in range(15):
            poly = random_polynomial(rng, 2, 5, allow_zero=False)
            k = int(poly.lowest_order())
            lead = poly.leading_form()
            deg = int(poly.degree())
            for point in [random_point(rng, 2) for _ in range(3)]:
                bound = sum(
                    abs(poly.homogeneous_component(j).evaluate(point))
                    for j in range(k + 1, deg + 1)
                )
                for lam in (Fraction(1), Fraction(2), Fraction(10), Fraction(100)):
                    value = lam**k * poly.evaluate(tuple(x / lam for x in point))
                    assert abs(value - lead.evaluate(point)) <= bound / lam


class TestAffineSubstitute:
    def test_shift_second_coordinate(self):
        poly = T1 * T2 * T2
        shifted = poly.affine_substitute(ratmat.identity(2), (0, Fraction(3)))
        assert shifted == parse_polynomial("t1*(3 + t2)^2", 2)

    def test_identity_is_noop(self):
        rng = random.Random(47)
        for _ in range(10):
            poly = random_polynomial(rng, 3, 3)
            assert poly.affine_substitute(ratmat.identity(3)) == poly

    def test_singular_matrix_rejected(self):
        with pytest.raises(ValueError):
            T1.affine_substitute([[1, 1], [1, 1]])

    def test_lowest_order_invariant_under_linear_substitution(self):
        rng = random.Random(53)
        for _ in range(25):
            poly = random_polynomial(rng, 3, 3, allow_zero=False)
            matrix = random_nonsingular(rng, 3)
            substituted = poly.affine_substitute(matrix)
            assert substituted.lowest_order() == poly.lowest_order()

    def test_degree_preserved(self):
        rng = random.Random(59)
        for _ in range(20):
            poly = random_polynomial(rng, 2, 4, allow_zero=False)
            matrix = random_nonsingular(rng, 2)
            assert poly.affine_substitute(matrix).degree() == poly.degree()

    def test_composition_of_substitutions(self):
        # Substituting by A then by B equals one substitution by B @ A.
        rng = random.Random(61)
        for _ in range(15):
            poly = random_polynomial(rng, 2, 3)
            a = random_nonsingular(rng, 2)
            b = random_nonsingular(rng, 2)
            twice = poly.affine_substitute(a).affine_substitute(b)
            once = poly.affine_substitute(ratmat.matmul(b, a))
            assert twice == once


class TestFloatMode:
    def test_relative_epsilon_canonicalization(self):
        poly = Polynomial(1, {(0,): 1.0, (1,): 1e-15}, FLOAT)
        assert len(poly) == 1

    def test_kept_when_above_epsilon(self):
        poly = Polynomial(1, {(0,): 1.0, (1,): 1e-9}, FLOAT)
        assert len(poly) == 2

    def test_conversion_keeps_values(self):
        poly = parse_polynomial("3*t1^2 - 1/2*t1", 1).to_float()
        assert poly.field == FLOAT
        assert poly.evaluate((2.0,)) == pytest.approx(11.0)


class TestCanonicalText:
    def test_graded_lex_printing(self):
        poly = parse_polynomial("-1/2*t3 + 3*t1^2*t2", 3)
        assert poly.to_text() == "3*t1^2*t2 - 1/2*t3"

    def test_zero_prints_as_zero(self):
        assert Polynomial.zero(2).to_text() == "0"

    def test_round_trip(self):
        rng = random.Random(67)
        for _ in range(40):
            poly = random_polynomial(rng, 3, 4)
            assert parse_polynomial(poly.to_text(), 3) == poly


def test_monomial_enumeration_is_graded_lex():
    exps = monomial_exponents(3, 2)
    assert exps[0] == (2, 0, 0)
    assert len(exps) == 6
    assert len(set(exps)) == 6
    assert all(sum(e) == 2 for e in exps)
    assert exps == sorted(exps, reverse=True)
