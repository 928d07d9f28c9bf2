"""Polynomial matrices: Jacobians, determinants, generic rank, alpha_bar."""

import itertools
import random

import pytest

from helpers import random_full_rank_system, random_nonsingular, random_polynomial
from waldkit import gallery
from waldkit.errors import SubmatrixBudgetError
from waldkit.poly import POS_INFINITY, Polynomial
from waldkit.polymatrix import (
    PolyMatrix,
    alpha_bar,
    generic_rank,
    jacobian,
    poly_det,
)
from waldkit.restrictions import parse_polynomial, parse_system


def text_matrix(rows, nvars):
    return PolyMatrix(
        [[parse_polynomial(cell, nvars) for cell in row] for row in rows]
    )


class TestJacobian:
    def test_product_restriction(self):
        system = gallery.product_restriction()
        assert jacobian(system) == text_matrix([["t2", "t1"]], 2)

    def test_coupled_cubics_display(self):
        matrix = jacobian(gallery.coupled_cubics_restriction())
        expected = text_matrix(
            [
                ["2*t1", "0", "3*t3^2", "0"],
                ["0", "2*t2", "0", "3*t4^2"],
                ["2*t1", "2*t2", "0", "0"],
            ],
            4,
        )
        assert matrix == expected

    def test_power_pair_display(self):
        matrix = jacobian(gallery.power_pair_restriction())
        expected = text_matrix([["2*t1", "0"], ["t2^2", "2*t1*t2"]], 2)
        assert matrix == expected


class TestPolyDet:
    def test_first_column_selection(self):
        matrix = jacobian(gallery.coupled_cubics_restriction())
        sub = matrix.submatrix(range(3), (0, 1, 2))
        assert poly_det(sub) == parse_polynomial("-12*t1*t2*t3^2", 4)

    def test_third_column_selection(self):
        matrix = jacobian(gallery.coupled_cubics_restriction())
        sub = matrix.submatrix(range(3), (0, 2, 3))
        assert poly_det(sub) == parse_polynomial("18*t1*t3^2*t4^2", 4)

    def test_diagonal_matrix(self):
        diag = text_matrix(
            [["t1^2", "0", "0"], ["0", "t2 + 1", "0"], ["0", "0", "3*t3"]], 3
        )
        assert poly_det(diag) == parse_polynomial("t1^2*(t2+1)*3*t3", 3)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            poly_det(text_matrix([["t1", "t2"]], 2))

    def test_matches_evaluation_of_numeric_determinant(self):
        # det(M)(x) == det(M(x)) at random rational points.
        from fractions import Fraction

        from waldkit import ratmat

        rng = random.Random(71)
        for _ in range(10):
            matrix = PolyMatrix(
                [[random_polynomial(rng, 2, 2, terms=3) for _ in range(3)]
                 for _ in range(3)]
            )
            point = (Fraction(rng.randint(-5, 5), 3), Fraction(rng.randint(-5, 5), 7))
            assert poly_det(matrix).evaluate(point) == ratmat.det(
                ratmat.as_matrix(matrix.evaluate(point))
            )


class TestGenericRank:
    def test_full_row_rank_jacobian(self):
        assert generic_rank(jacobian(gallery.coupled_cubics_restriction())) == 3

    def test_zero_matrix(self):
        zero = PolyMatrix([[Polynomial.zero(2), Polynomial.zero(2)]])
        assert generic_rank(zero) == 0

    def test_rank_drop_with_constant_row(self):
        # Leading matrix of the power pair away from the origin:
        # rows (2 t1, 0) and (c^2, 0) only span one direction.
        matrix = text_matrix([["2*t1", "0"], ["1", "0"]], 2)
        assert generic_rank(matrix) == 1

    def test_proportional_rows_over_the_function_field(self):
        # Second row is t1 times the first: rank 1 even though the rows are
        # not proportional with constant coefficients.
        matrix = text_matrix([["1", "t1"], ["t1", "t1^2"]], 2)
        assert generic_rank(matrix) == 1

    def test_left_multiplication_preserves_rank(self):
        rng = random.Random(73)
        matrix = jacobian(gallery.coupled_cubics_restriction())
        for _ in range(10):
            mix = random_nonsingular(rng, 3)
            assert generic_rank(matrix.left_mul(mix)) == 3

    def test_agrees_with_symbolic_minors_on_small_matrices(self):
        rng = random.Random(79)
        for _ in range(15):
            rows = rng.randint(1, 3)
            cols = rng.randint(1, 3)
            matrix = PolyMatrix(
                [[random_polynomial(rng, 2, 2, terms=2) for _ in range(cols)]
                 for _ in range(rows)]
            )
            expected = 0
            for size in range(1, min(rows, cols) + 1):
                nonzero = any(
                    not poly_det(matrix.submatrix(ri, ci)).is_zero()
                    for ri in itertools.combinations(range(rows), size)
                    for ci in itertools.combinations(range(cols), size)
                )
                if nonzero:
                    expected = size
            assert generic_rank(matrix) == expected


class TestAlphaBar:
    def test_coupled_cubics(self):
        assert alpha_bar(jacobian(gallery.coupled_cubics_restriction())) == 4

    def test_offset_rank_drop(self):
        assert alpha_bar(gallery.offset_rank_drop_matrix(1)) == 2

    def test_power_pair_at_origin(self):
        system = gallery.power_pair_restriction((0, 0)).shifted((0, 0))
        assert alpha_bar(jacobian(system)) == 3

    def test_zero_iff_full_rank_at_origin(self):
        system = parse_system("p=2 q=1\nt1 + t1*t2\n")
        assert alpha_bar(jacobian(system)) == 0

    def test_infinite_when_rank_deficient(self):
        matrix = text_matrix([["t1", "t1"], ["t1", "t1"]], 2)
        assert alpha_bar(matrix) == POS_INFINITY

    def test_budget_guard(self):
        matrix = jacobian(gallery.coupled_cubics_restriction())
        with pytest.raises(SubmatrixBudgetError):
            alpha_bar(matrix, cap=2)

    def test_selection_orders_bound_alpha_bar(self):
        # Every selection's determinant order is >= alpha_bar, equality for
        # at least one; the coupled cubics realize strict inequality (5 > 4).
        matrix = jacobian(gallery.coupled_cubics_restriction())
        bar = alpha_bar(matrix)
        orders = [
            poly_det(matrix.submatrix(range(3), cols)).lowest_order()
            for cols in itertools.combinations(range(4), 3)
        ]
        assert min(orders) == bar
        assert all(order >= bar for order in orders)
        assert sorted(orders) == [4, 4, 5, 5]

    def test_random_systems_satisfy_selection_bound(self):
        rng = random.Random(83)
        for _ in range(8):
            system = random_full_rank_system(rng, 3, 2)
            matrix = jacobian(system)
            bar = alpha_bar(matrix)
            orders = [
                poly_det(matrix.submatrix(range(2), cols)).lowest_order()
                for cols in itertools.combinations(range(3), 2)
            ]
            assert min(orders) == bar
