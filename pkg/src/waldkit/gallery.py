"""Small gallery of restriction systems exercising every regime.

These fixtures cover the interesting classification outcomes: invariance
failures under reparametrization, parameter-dependent limits, pivotal
non-standard limits, and divergence.  They feed the test suite, the demo
scripts and the ``wald reproduce`` command.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Polynomial
from .polymatrix import PolyMatrix
from .restrictions import RestrictionSystem, parse_polynomial, parse_system


def linear_restriction() -> RestrictionSystem:
    """p=1: ``t1 = 0``; the regular baseline, limit ``chi2_1``."""
    return parse_system("p=1 q=1\nt1\ntheta_bar= 0\n")


def square_restriction() -> RestrictionSystem:
    """p=1: ``t1^2 = 0``; same null set as ``t1 = 0`` but limit
    ``chi2_1 / 4`` at the origin."""
    return parse_system("p=1 q=1\nt1^2\ntheta_bar= 0\n")


def product_restriction(theta_bar=(0, 0)) -> RestrictionSystem:
    """p=2: ``t1*t2 = 0``; the limit depends on where the null is tested."""
    system = parse_system("p=2 q=1\nt1*t2\n")
    return RestrictionSystem(2, 1, system.g, tuple(Fraction(x) for x in theta_bar))


def sphere_restriction(p: int) -> RestrictionSystem:
    """``t1^2 + ... + tp^2 = 0``; pivotal non-standard limit ``chi2_p / 4``."""
    body = " + ".join(f"t{j}^2" for j in range(1, p + 1))
    origin = " ".join("0" for _ in range(p))
    return parse_system(f"p={p} q=1\n{body}\ntheta_bar= {origin}\n")


def power_pair_restriction(theta_bar=(0, 0)) -> RestrictionSystem:
    """p=q=2: ``(t1^2, t1*t2^2)``; finite non-standard limit at the origin,
    divergence along the rest of its null line."""
    system = parse_system("p=2 q=2\nt1^2\nt1*t2^2\n")
    return RestrictionSystem(2, 2, system.g, tuple(Fraction(x) for x in theta_bar))


def coupled_cubics_restriction() -> RestrictionSystem:
    """p=4, q=3 with linearly dependent degree-one Jacobian rows; the
    classic case needing a non-identity row mix before rescaling."""
    return parse_system(
        "p=4 q=3\n"
        "t1^2 + t3^3\n"
        "t2^2 + t4^3\n"
        "t1^2 + t2^2\n"
        "theta_bar= 0 0 0 0\n"
    )


def offset_rank_drop_matrix(c=1) -> PolyMatrix:
    """2x2 polynomial matrix with no valid degree sharing for ``c != 0``:
    ``[[t1, 0], [(c+t2)^2, t1*(c+t2)]]``; deficient rank."""
    c = Fraction(c)
    rows = [
        [parse_polynomial("t1", 2), Polynomial.zero(2)],
        [
            parse_polynomial(f"({c}+t2)^2", 2),
            parse_polynomial(f"t1*({c}+t2)", 2),
        ],
    ]
    return PolyMatrix(rows)


def standard_fixtures() -> dict[str, RestrictionSystem]:
    """The systems used by the reproduction harness."""
    return {
        "linear": linear_restriction(),
        "square": square_restriction(),
        "product-origin": product_restriction((0, 0)),
        "product-offaxis": product_restriction((1, 0)),
        "sphere-2": sphere_restriction(2),
        "sphere-3": sphere_restriction(3),
        "power-pair-origin": power_pair_restriction((0, 0)),
        "power-pair-offaxis": power_pair_restriction((0, 1)),
        "coupled-cubics": coupled_cubics_restriction(),
    }
