"""Symbolic-numeric toolkit for Wald tests of locally singular polynomial
restrictions: exact classification of the limit regime, Monte Carlo
sampling of the non-standard asymptotic laws, conservative chi-square
bounds, and a data-driven thresholding procedure."""

__version__ = "0.1.0"

from .adaptive import (
    AdaptiveConfig,
    AdaptiveVerdict,
    adaptive_analyze,
    adaptive_bound,
    estimate_k,
    threshold_coefficients,
)
from .chisq import (
    BoundSpec,
    bound_factor,
    chisq_cdf,
    chisq_pdf,
    chisq_quantile,
    conservative_max_p,
    tail_crossover,
)
from .cldr import CldrAnalysis, analyze_at, build_gbar, cldr_construct, residual
from .errors import (
    DivergentLawError,
    ParseError,
    RankDeficiencyError,
    RedrawLimitError,
    SingularAtPoint,
    SubmatrixBudgetError,
    WaldkitError,
)
from .limitlaw import (
    Diverges,
    EmpiricalLaw,
    LimitLawConfig,
    QuantileTable,
    empirical_quantile,
    finite_T_reference,
    ks_distance,
    sample_limit_law,
)
from .poly import EXACT, FLOAT, Polynomial
from .polymatrix import PolyMatrix, alpha_bar, generic_rank, jacobian, poly_det
from .restrictions import (
    RestrictionSystem,
    format_system,
    load_system,
    parse_system,
    save_system,
)
from .waldstat import (
    WaldInput,
    WaldResult,
    collapse_to_single,
    transform_restrictions,
    wald_statistic,
)
