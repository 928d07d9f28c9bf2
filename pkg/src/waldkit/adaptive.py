"""Data-driven analysis from ``(theta_hat, V_hat)`` alone.

The true zero pattern of the expansion coefficients around the tested
point is unknown in practice; estimated coefficients are almost surely
nonzero.  Hard thresholding at ``c / lambda_T**delta`` (``0 < delta < 1``)
recovers the pattern consistently: estimation noise is ``O(1/lambda_T)``,
below the threshold asymptotically, while true nonzero coefficients stay
above it.

The pipeline re-centers the system at ``theta_hat`` (exactly: binary64
inputs are rationals), thresholds, and branches:

* ``Standard``       -- the thresholded ``det(G G')`` keeps its constant
                        term: no singularity, the usual ``chi2_q`` applies;
* ``Divergent``      -- the thresholded Jacobian classifies deficient-rank;
* ``EstimatedLimit`` -- otherwise: estimated degree shares, leading forms,
                        a sampled limit law, and a scaled chi-square bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chisq import BoundSpec
from .cldr import CLDR, CldrAnalysis, cldr_construct, euler_gbar
from .errors import DivergentLawError, RankDeficiencyError
from .limitlaw import EmpiricalLaw, LimitLawConfig, sample_forms_law
from .poly import Polynomial
from .polymatrix import PolyMatrix, jacobian, poly_det
from .restrictions import RestrictionSystem

BRANCH_STANDARD = "Standard"
BRANCH_DIVERGENT = "Divergent"
BRANCH_ESTIMATED = "EstimatedLimit"


@dataclass(frozen=True)
class AdaptiveConfig:
    """Threshold rule ``|coefficient| < c / lambda_T**delta  ->  0``."""

    lambda_T: float
    c: float = 1.0
    delta: float = 0.4

    def __post_init__(self):
        if not self.lambda_T > 0:
            raise ValueError("lambda_T must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie strictly inside (0, 1)")

    @classmethod
    def from_T(cls, T: float, c: float = 1.0, delta: float = 0.4) -> "AdaptiveConfig":
        return cls(lambda_T=float(T) ** 0.5, c=c, delta=delta)

    @property
    def threshold(self) -> float:
        return self.c / self.lambda_T**self.delta


@dataclass(frozen=True)
class AdaptiveVerdict:
    branch: str
    k_hat_det: float
    threshold: float
    analysis: CldrAnalysis | None = None
    alpha_hat: tuple[int, ...] | None = None
    law: EmpiricalLaw | None = None
    bound: BoundSpec | None = None

    def __post_init__(self):
        if self.branch == BRANCH_ESTIMATED:
            if self.analysis is None or not self.analysis.is_cldr:
                raise ValueError("EstimatedLimit requires a CLDR analysis")


def threshold_coefficients(poly: Polynomial, cfg: AdaptiveConfig) -> Polynomial:
    """Zero out coefficients below the threshold; keep the rest as-is."""
    cutoff = cfg.threshold
    kept = {e: c for e, c in poly.terms() if abs(c) >= cutoff}
    return Polynomial(poly.nvars, kept, poly.field)


def estimate_k(poly: Polynomial) -> float:
    """Lowest order of a thresholded polynomial (``+inf`` if it vanished)."""
    return poly.lowest_order()


def _threshold_matrix(matrix: PolyMatrix, cfg: AdaptiveConfig) -> PolyMatrix:
    return matrix.map(lambda e: threshold_coefficients(e, cfg))


def adaptive_analyze(
    system: RestrictionSystem,
    theta_hat,
    v_hat,
    cfg: AdaptiveConfig,
    *,
    draws: int | None = None,
    seed: int = 0,
) -> AdaptiveVerdict:
    """Run the adaptive branch decision at an estimated point.

    ``system.theta_bar`` is ignored: the procedure sees only the estimate.
    When ``draws`` is given and the branch is ``EstimatedLimit``, the
    estimated limit law is sampled with covariance ``v_hat``.
    """
    point = tuple(Fraction(float(x)) for x in theta_hat)
    if len(point) != system.p:
        raise ValueError("theta_hat has wrong dimension")
    v = np.asarray(v_hat, dtype=np.float64)
    if v.shape != (system.p, system.p):
        raise ValueError("V_hat has wrong shape")
    if float(np.min(np.linalg.eigvalsh(0.5 * (v + v.T)))) <= 0.0:
        raise ValueError("V_hat is not positive definite")

    recentered = system.shifted(point)
    raw_jacobian = jacobian(recentered)
    det_estimate = poly_det(raw_jacobian @ raw_jacobian.transpose())
    k_hat_det = estimate_k(threshold_coefficients(det_estimate, cfg))

    thresholded = _threshold_matrix(raw_jacobian, cfg)
    for i in range(thresholded.rows):
        if all(entry.is_zero() for entry in thresholded.row(i)):
            raise RankDeficiencyError(
                f"thresholding annihilated Jacobian row {i + 1}; the system "
                "has no usable restriction there at this sample size"
            )

    if k_hat_det == 0:
        return AdaptiveVerdict(
            branch=BRANCH_STANDARD,
            k_hat_det=0,
            threshold=cfg.threshold,
            bound=BoundSpec(alpha=0, scale=Fraction(1), p=system.q, q=system.q),
        )

    analysis = cldr_construct(thresholded)
    if not analysis.is_cldr:
        return AdaptiveVerdict(
            branch=BRANCH_DIVERGENT,
            k_hat_det=k_hat_det,
            threshold=cfg.threshold,
            analysis=analysis,
            alpha_hat=analysis.alpha,
        )

    law = None
    if draws is not None:
        law_cfg = LimitLawConfig(V=v, draws=draws, seed=seed)
        law = sample_forms_law(
            euler_gbar(analysis),
            analysis.Gbar,
            law_cfg,
            metadata={
                "kind": "adaptive-estimated-limit",
                "alpha_hat": list(analysis.alpha),
                "threshold": cfg.threshold,
            },
        )
    alpha = int(min(analysis.alpha))
    bound = BoundSpec(
        alpha=alpha,
        scale=Fraction(1, (1 + alpha) ** 2),
        p=system.p,
        q=system.q,
    )
    return AdaptiveVerdict(
        branch=BRANCH_ESTIMATED,
        k_hat_det=k_hat_det,
        threshold=cfg.threshold,
        analysis=analysis,
        alpha_hat=analysis.alpha,
        law=law,
        bound=bound,
    )


def adaptive_bound(verdict: AdaptiveVerdict) -> BoundSpec:
    """Scaled chi-square bound from the estimated degree shares.

    ``Standard`` keeps the plain ``chi2_q`` reference; ``EstimatedLimit``
    uses ``chi2_p / (1 + min alpha_hat)**2``; no bound exists on the
    ``Divergent`` branch.
    """
    if verdict.branch == BRANCH_DIVERGENT:
        raise DivergentLawError("no bound exists: the statistic diverges")
    if verdict.bound is not None:
        return verdict.bound
    if verdict.branch == BRANCH_STANDARD:
        q = 1 if verdict.analysis is None else verdict.analysis.q
        return BoundSpec(alpha=0, scale=Fraction(1), p=q, q=q)
    analysis = verdict.analysis
    alpha = int(min(verdict.alpha_hat))
    return BoundSpec(
        alpha=alpha,
        scale=Fraction(1, (1 + alpha) ** 2),
        p=analysis.Gbar.cols,
        q=analysis.q,
    )
