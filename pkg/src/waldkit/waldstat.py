"""Finite-sample Wald statistic and restriction-system transformations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import ratmat
from .errors import SingularAtPoint
from .poly import Polynomial
from .polymatrix import jacobian
from .restrictions import RestrictionSystem

# Reciprocal condition number below which G V G' counts as singular.
RCOND_FLOOR = 1e-12
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class WaldInput:
    """Estimator state feeding the statistic: ``theta_hat``, ``V_hat`` and
    the convergence rate ``lambda_T`` (``lambda_T**2 = T`` in the standard
    root-T case)."""

    theta_hat: tuple[float, ...]
    V_hat: np.ndarray
    lambda_T: float

    def __post_init__(self):
        object.__setattr__(self, "theta_hat", tuple(float(x) for x in self.theta_hat))
        v = np.asarray(self.V_hat, dtype=np.float64)
        p = len(self.theta_hat)
        if v.shape != (p, p):
            raise ValueError("V_hat has wrong shape")
        scale = max(1.0, float(np.max(np.abs(v))))
        if float(np.max(np.abs(v - v.T))) > SYMMETRY_TOL * scale:
            raise ValueError("V_hat is not symmetric")
        if float(np.min(np.linalg.eigvalsh(v))) <= 0.0:
            raise ValueError("V_hat is not positive definite")
        object.__setattr__(self, "V_hat", v)
        if not self.lambda_T > 0:
            raise ValueError("lambda_T must be positive")

    @classmethod
    def from_T(cls, theta_hat, V_hat, T: float) -> "WaldInput":
        return cls(tuple(theta_hat), V_hat, float(T) ** 0.5)


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    rcond: float


def wald_statistic(system: RestrictionSystem, data: WaldInput) -> WaldResult:
    """``W = lambda_T**2 * g' [G V_hat G']^{-1} g`` at ``theta_hat``.

    Raises :class:`SingularAtPoint` when the inner matrix has reciprocal
    condition number at or below ``RCOND_FLOOR``; near-singularity is the
    regime under study, so it is reported, never regularized away.
    """
    if len(data.theta_hat) != system.p:
        raise ValueError("theta_hat has wrong dimension")
    point = data.theta_hat
    gval = np.array([float(gi.evaluate(point)) for gi in system.g])
    gmat = np.array(
        [
            [float(entry.evaluate(point)) for entry in row]
            for row in jacobian(system).entries
        ]
    )
    inner = gmat @ data.V_hat @ gmat.T
    inner = 0.5 * (inner + inner.T)
    eig = np.linalg.eigvalsh(inner)
    top = float(np.max(np.abs(eig)))
    if top == 0.0:
        raise SingularAtPoint("G V G' is the zero matrix at theta_hat")
    rcond = float(np.min(np.abs(eig))) / top
    if np.min(eig) <= 0.0 or rcond <= RCOND_FLOOR:
        raise SingularAtPoint(
            f"G V G' is numerically singular at theta_hat (rcond={rcond:.3e})"
        )
    chol = np.linalg.cholesky(inner)
    half = np.linalg.solve(chol, gval)
    statistic = float(data.lambda_T**2 * half @ half)
    return WaldResult(statistic=statistic, rcond=rcond)


def transform_restrictions(
    system: RestrictionSystem, mixing: Sequence[Sequence]
) -> RestrictionSystem:
    """Replace ``g`` by ``M g`` for a nonsingular q-by-q rational matrix.

    The statistic is invariant under this operation; the tested point and
    covariance carry over unchanged.
    """
    m = ratmat.as_matrix(mixing)
    if len(m) != system.q or len(m[0]) != system.q:
        raise ValueError("mixing matrix has wrong shape")
    if ratmat.det(m) == 0:
        raise ValueError("mixing matrix is singular")
    new_g = tuple(
        sum(
            (m[i][j] * system.g[j] for j in range(system.q)),
            Polynomial.zero(system.p),
        )
        for i in range(system.q)
    )
    return RestrictionSystem(system.p, system.q, new_g, system.theta_bar, system.V)


def collapse_to_single(system: RestrictionSystem) -> RestrictionSystem:
    """Replace the q restrictions by the single restriction ``sum g_i**2``.

    The null set is unchanged and a single restriction always admits a
    finite limit law, at a possible cost in power.  Degree doubles.
    """
    total = sum(
        (gi * gi for gi in system.g), Polynomial.zero(system.p)
    )
    return RestrictionSystem(system.p, 1, (total,), system.theta_bar, system.V)
