"""Chi-square distribution engine and conservative critical-value bounds.

The distribution functions are self-contained (regularized incomplete
gamma via series and continued fraction) so the bound computations do not
depend on the Monte Carlo layer or an external distribution library; the
test suite cross-checks them against an independent quadrature oracle.

The bound machinery: whenever the leading-form classification holds with
degree shares ``alpha_i``, the limit law is stochastically dominated by
``chi2_p / (1 + min alpha_i)**2``.  Comparing that scaled density with the
``chi2_q`` density at the standard critical value decides, per tail
monotonicity, up to which ambient dimension ``p`` the standard test stays
conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.optimize import brentq

from .cldr import CldrAnalysis
from .errors import DivergentLawError

_EPS = 1e-16
_MAX_ITER = 800
_P_SCAN_CAP = 1000


def _gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x), absolute error < 1e-12."""
    if x < 0 or a <= 0:
        raise ValueError("need x >= 0 and a > 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        # Series expansion around zero.
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    # Lentz continued fraction for the upper tail Q(a, x).
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    q = math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    return 1.0 - q


def _check_dof(k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise ValueError("degrees of freedom must be a positive integer")


def chisq_cdf(x: float, k: int) -> float:
    """P(chi2_k <= x)."""
    _check_dof(k)
    if x < 0:
        raise ValueError("x must be non-negative")
    return min(1.0, _gamma_p(k / 2.0, x / 2.0))


def chisq_logpdf(x: float, k: int) -> float:
    _check_dof(k)
    if x <= 0:
        raise ValueError("the chi-square log-density needs x > 0")
    half = k / 2.0
    return (half - 1.0) * math.log(x) - x / 2.0 - half * math.log(2.0) - math.lgamma(half)


def chisq_pdf(x: float, k: int) -> float:
    _check_dof(k)
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        if k == 1:
            return math.inf
        return 0.5 if k == 2 else 0.0
    return math.exp(chisq_logpdf(x, k))


def chisq_quantile(gamma: float, k: int) -> float:
    """Inverse CDF by bracketed root finding (absolute error < 1e-10)."""
    _check_dof(k)
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly inside (0, 1)")
    hi = k + 10.0 * math.sqrt(2.0 * k) + 10.0
    while chisq_cdf(hi, k) < gamma:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("quantile bracket expansion failed")
    return float(brentq(lambda x: chisq_cdf(x, k) - gamma, 0.0, hi, xtol=1e-12))


@dataclass(frozen=True)
class BoundSpec:
    """A scaled chi-square upper bound ``scale * chi2_p`` with the
    ``chi2_q`` reference it is compared against."""

    alpha: int
    scale: Fraction
    p: int
    q: int
    level: float | None = None
    conservative: bool | None = None
    crossover: float | None = None

    def critical_value(self, level: float) -> float:
        """Conservative critical value at test size ``level``."""
        return float(self.scale) * chisq_quantile(1.0 - level, self.p)


def bound_factor(analysis: CldrAnalysis) -> BoundSpec:
    """Scale ``1/(1 + alpha)**2`` from the smallest degree share.

    Only defined under the CLDR classification; with deficient rank the
    statistic diverges and no bound exists.  A smallest share of zero gives
    scale one, i.e. the plain ``chi2_p`` bound.
    """
    if not analysis.is_cldr:
        raise DivergentLawError("no bound exists: the statistic diverges")
    alpha = int(analysis.min_alpha)
    return BoundSpec(
        alpha=alpha,
        scale=Fraction(1, (1 + alpha) ** 2),
        p=analysis.Gbar.cols,
        q=analysis.q,
    )


def tail_crossover(p1: int, a1: float, p2: int, a2: float) -> float:
    """Largest point where the densities of ``chi2_p1 / a1`` and
    ``chi2_p2 / a2`` cross (``p2 > p1``, ``a2 > a1 > 0``).

    Beyond the crossover the heavier-dof scaled density is strictly
    smaller: the log density ratio is ``C - ((p2-p1)/2) log y
    + ((a2-a1)/2) y``, decreasing then increasing, so it has at most two
    roots and is monotone beyond its stationary point.  Returns 0.0 when
    the lighter law dominates everywhere.
    """
    if not (p2 > p1 >= 1):
        raise ValueError("need p2 > p1 >= 1")
    if not (a2 > a1 > 0):
        raise ValueError("need a2 > a1 > 0")

    def log_ratio(y: float) -> float:
        return (math.log(a1) + chisq_logpdf(a1 * y, p1)) - (
            math.log(a2) + chisq_logpdf(a2 * y, p2)
        )

    stationary = (p2 - p1) / (a2 - a1)
    if log_ratio(stationary) >= 0.0:
        return 0.0
    hi = stationary
    while log_ratio(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("crossover bracket expansion failed")
    return float(brentq(log_ratio, stationary, hi, xtol=1e-12))


def conservative_max_p(q: int, alpha: int, level: float) -> int:
    """Largest ambient dimension for which the standard ``chi2_q`` critical
    value stays conservative under the ``chi2_p/(1+alpha)**2`` bound.

    Applies to the purely singular regime ``alpha >= 1``.  The scaled-bound
    density must be strictly below the ``chi2_q`` density at the standard
    critical value; a tie counts as non-conservative (fail-safe), and the
    comparison runs in log space.
    """
    _check_dof(q)
    if not isinstance(alpha, int) or alpha < 1:
        raise ValueError("alpha must be an integer >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly inside (0, 1)")
    critical = chisq_quantile(1.0 - level, q)
    reference = chisq_logpdf(critical, q)
    scale = float((1 + alpha) ** 2)
    p = q
    while p <= _P_SCAN_CAP:
        candidate = math.log(scale) + chisq_logpdf(scale * critical, p)
        if not candidate < reference:
            return p - 1
        p += 1
    return _P_SCAN_CAP


def reference_max_p_table() -> list[dict]:
    """The benchmark (q, alpha, level) -> max p rows."""
    rows = []
    for q, alpha, level in [(1, 1, 0.05), (1, 1, 0.01), (2, 1, 0.05), (3, 1, 0.05)]:
        rows.append(
            {
                "q": q,
                "alpha": alpha,
                "level": level,
                "max_p": conservative_max_p(q, alpha, level),
            }
        )
    return rows
