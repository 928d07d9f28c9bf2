"""Matrices of polynomials: Jacobians, exact determinants, generic rank and
the minimal determinant order.

The *generic rank* of a polynomial matrix is its rank over the field of
rational functions, i.e. the largest size of a square submatrix whose
determinant is a nonzero polynomial; it equals the numeric rank at almost
every point.  It is computed by exact evaluation at random rational points
(Schwartz-Zippel) and certified symbolically whenever the randomized answer
falls short of ``min(q, p)``.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import ratmat
from .errors import SubmatrixBudgetError
from .poly import EXACT, POS_INFINITY, Polynomial
from .restrictions import RestrictionSystem

# Schwartz-Zippel sampling parameters for generic_rank.
_RANK_TRIALS = 3
_RANK_COORD_BOUND = 10**9
_RANK_SEED = 0x5EED

DEFAULT_SUBMATRIX_CAP = 10**6


class PolyMatrix:
    """Immutable rectangular matrix of polynomials of a common ambient
    dimension and coefficient field."""

    __slots__ = ("rows", "cols", "nvars", "field", "entries")

    def __init__(self, entries: Sequence[Sequence[Polynomial]]):
        grid = tuple(tuple(row) for row in entries)
        if not grid or not grid[0]:
            raise ValueError("PolyMatrix cannot be empty")
        first = grid[0][0]
        for row in grid:
            if len(row) != len(grid[0]):
                raise ValueError("ragged rows")
            for entry in row:
                if not isinstance(entry, Polynomial):
                    raise TypeError("entries must be Polynomial values")
                if entry.nvars != first.nvars or entry.field != first.field:
                    raise ValueError("entries must share ambient dimension and field")
        object.__setattr__(self, "entries", grid)
        object.__setattr__(self, "rows", len(grid))
        object.__setattr__(self, "cols", len(grid[0]))
        object.__setattr__(self, "nvars", first.nvars)
        object.__setattr__(self, "field", first.field)

    def __setattr__(self, name, value):
        raise AttributeError("PolyMatrix is immutable")

    def __getitem__(self, index: tuple[int, int]) -> Polynomial:
        i, j = index
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        body = "; ".join(
            ", ".join(entry.to_text() for entry in row) for row in self.entries
        )
        return f"PolyMatrix({self.rows}x{self.cols}: {body})"

    def row(self, i: int) -> tuple[Polynomial, ...]:
        return self.entries[i]

    def map(self, fn) -> "PolyMatrix":
        return PolyMatrix([[fn(e) for e in row] for row in self.entries])

    def to_float(self) -> "PolyMatrix":
        return self.map(lambda e: e.to_float())

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(list(zip(*self.entries)))

    def submatrix(self, row_idx: Iterable[int], col_idx: Iterable[int]) -> "PolyMatrix":
        return PolyMatrix(
            [[self.entries[i][j] for j in col_idx] for i in row_idx]
        )

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return PolyMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + other.map(lambda e: -e)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimension mismatch")
        cols = other.transpose().entries
        return PolyMatrix(
            [
                [sum((a * b for a, b in zip(row, col)),
                     Polynomial.zero(self.nvars, self.field))
                 for col in cols]
                for row in self.entries
            ]
        )

    def left_mul(self, s: Sequence[Sequence]) -> "PolyMatrix":
        """Multiply by a constant matrix on the left."""
        rows = []
        for srow in s:
            if len(srow) != self.rows:
                raise ValueError("constant matrix has wrong shape")
            rows.append(
                [
                    sum(
                        (coeff * self.entries[k][j] for k, coeff in enumerate(srow)
                         if coeff != 0),
                        Polynomial.zero(self.nvars, self.field),
                    )
                    for j in range(self.cols)
                ]
            )
        return PolyMatrix(rows)

    def right_mul_constant(self, mat: Sequence[Sequence]) -> "PolyMatrix":
        """Multiply by a constant matrix on the right."""
        ncols = len(mat[0])
        if len(mat) != self.cols:
            raise ValueError("constant matrix has wrong shape")
        rows = []
        for row in self.entries:
            rows.append(
                [
                    sum(
                        (row[k] * mat[k][j] for k in range(self.cols)),
                        Polynomial.zero(self.nvars, self.field),
                    )
                    for j in range(ncols)
                ]
            )
        return PolyMatrix(rows)

    def evaluate(self, point) -> list[list]:
        return [[entry.evaluate(point) for entry in row] for row in self.entries]

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate every entry at ``(n, p)`` points -> ``(n, rows, cols)``."""
        points = np.asarray(points, dtype=np.float64)
        out = np.empty((points.shape[0], self.rows, self.cols))
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                out[:, i, j] = entry.evaluate_batch(points)
        return out

    def lowest_order(self) -> float:
        """Minimum lowest order over all entries (``+inf`` for all-zero)."""
        return min(entry.lowest_order() for row in self.entries for entry in row)

    def homogeneous_component(self, k: int) -> "PolyMatrix":
        return self.map(lambda e: e.homogeneous_component(k))

    def affine_substitute(self, a, shift=None) -> "PolyMatrix":
        return self.map(lambda e: e.affine_substitute(a, shift))


def jacobian(system: RestrictionSystem) -> PolyMatrix:
    """The q-by-p matrix of partial derivatives of the restrictions."""
    return PolyMatrix(
        [
            [gi.differentiate(j) for j in range(system.p)]
            for gi in system.g
        ]
    )


def poly_det(matrix: PolyMatrix) -> Polynomial:
    """Exact determinant by Laplace expansion with column-subset memoization.

    Restriction counts are small, so the O(2^q) expansion is cheap and stays
    in the polynomial ring (no division).
    """
    if matrix.rows != matrix.cols:
        raise ValueError("determinant of a non-square matrix")
    n = matrix.rows
    entries = matrix.entries
    zero = Polynomial.zero(matrix.nvars, matrix.field)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset) -> Polynomial:
        if row == n:
            return Polynomial.constant(matrix.nvars, 1, matrix.field)
        total = zero
        for sign, j in zip(itertools.cycle((1, -1)), sorted(cols)):
            entry = entries[row][j]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols - {j})
            term = entry * sub
            total = total + (term if sign > 0 else -term)
        return total

    result = minor(0, frozenset(range(n)))
    minor.cache_clear()
    return result


def _random_rational_point(rng: random.Random, nvars: int) -> tuple[Fraction, ...]:
    return tuple(
        Fraction(rng.randint(1, _RANK_COORD_BOUND), rng.randint(1, _RANK_COORD_BOUND))
        for _ in range(nvars)
    )


def _has_nonzero_minor(matrix: PolyMatrix, size: int) -> bool:
    for rows in itertools.combinations(range(matrix.rows), size):
        for cols in itertools.combinations(range(matrix.cols), size):
            if not poly_det(matrix.submatrix(rows, cols)).is_zero():
                return True
    return False


def generic_rank(matrix: PolyMatrix) -> int:
    """Rank over the rational-function field.

    Exact evaluation at random rational points gives a lower bound that is
    almost surely tight (Schwartz-Zippel); if it falls short of
    ``min(rows, cols)``, the answer is certified by exact symbolic minors,
    which removes the randomness entirely.
    """
    if matrix.field != EXACT:
        raise ValueError("generic rank requires exact coefficients")
    bound = min(matrix.rows, matrix.cols)
    rng = random.Random(_RANK_SEED)
    best = 0
    for _ in range(_RANK_TRIALS):
        point = _random_rational_point(rng, matrix.nvars)
        values = ratmat.as_matrix(matrix.evaluate(point))
        best = max(best, ratmat.rank(values))
        if best == bound:
            return best
    # Certify: bump while some larger minor is a nonzero polynomial.
    while best < bound and _has_nonzero_minor(matrix, best + 1):
        best += 1
    return best


def column_selections(p: int, q: int, cap: int = DEFAULT_SUBMATRIX_CAP):
    """All q-element column index sets in lexicographic order."""
    count = math.comb(p, q)
    if count > cap:
        raise SubmatrixBudgetError(
            f"{count} column selections exceed the cap of {cap}"
        )
    return itertools.combinations(range(p), q)


def alpha_bar(matrix: PolyMatrix, cap: int = DEFAULT_SUBMATRIX_CAP) -> float:
    """Minimum, over q-column selections, of the lowest order of the
    submatrix determinant; ``+inf`` when every determinant is the zero
    polynomial (generic rank below q)."""
    q, p = matrix.rows, matrix.cols
    if q > p:
        raise ValueError(f"alpha_bar requires q <= p, got {q} > {p}")
    best = POS_INFINITY
    all_rows = range(q)
    for cols in column_selections(p, q, cap):
        order = poly_det(matrix.submatrix(all_rows, cols)).lowest_order()
        best = min(best, order)
        if best == 0:
            break
    return best
