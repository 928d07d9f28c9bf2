"""Shared seeded generators for randomized property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from waldkit import ratmat
from waldkit.poly import Polynomial
from waldkit.restrictions import RestrictionSystem


def random_rational(rng: random.Random, lo: int = -9, hi: int = 9,
                    max_den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def random_polynomial(rng: random.Random, nvars: int, degree: int,
                      terms: int = 6, allow_zero: bool = True) -> Polynomial:
    acc = {}
    for _ in range(terms):
        total = rng.randint(0, degree)
        exps = [0] * nvars
        for _ in range(total):
            exps[rng.randrange(nvars)] += 1
        acc[tuple(exps)] = acc.get(tuple(exps), 0) + random_rational(rng)
    poly = Polynomial(nvars, acc)
    if poly.is_zero() and not allow_zero:
        return Polynomial.variable(nvars, 0)
    return poly


def random_point(rng: random.Random, nvars: int) -> tuple[Fraction, ...]:
    return tuple(random_rational(rng) for _ in range(nvars))


def random_nonsingular(rng: random.Random, n: int) -> ratmat.Mat:
    while True:
        mat = ratmat.as_matrix(
            [[random_rational(rng, -3, 3, 2) for _ in range(n)] for _ in range(n)]
        )
        if ratmat.det(mat) != 0:
            return mat


def random_full_rank_system(rng: random.Random, p: int, q: int,
                            degree: int = 3) -> RestrictionSystem:
    """A random centered system whose Jacobian has full generic row rank."""
    from waldkit.polymatrix import generic_rank, jacobian

    while True:
        g = []
        for _ in range(q):
            poly = random_polynomial(rng, p, degree, terms=5)
            poly = poly - Polynomial.constant(p, poly.coefficient((0,) * p))
            if poly.is_zero():
                poly = Polynomial.variable(p, rng.randrange(p))
            g.append(poly)
        system = RestrictionSystem(p, q, tuple(g), (Fraction(0),) * p)
        if generic_rank(jacobian(system)) == q:
            return system
