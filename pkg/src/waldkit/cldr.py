"""Recursive leading-form analysis of a polynomial Jacobian.

Given a q-by-p polynomial matrix G of full generic row rank, the recursion
builds a nonsingular rational matrix ``S`` and degree shares
``alpha_1 <= ... <= alpha_q`` such that

    diag(lam**alpha_i) . S . G(y/lam)  ->  Gbar(y)     as lam -> inf,

where row i of ``Gbar`` is homogeneous of degree ``alpha_i`` and nonzero.
Each stage takes the lowest order ``k`` present among the remaining rows,
collects the degree-``k`` leading forms, and row-reduces their exact
coefficient matrix; rows whose leading forms are dependent (over constants)
get the dependency subtracted, pushing them to strictly higher order, and
the recursion continues on them.  The greedy construction maximizes
``sum(alpha_i)`` over all nonsingular ``S``.

Classification: ``sum(alpha_i)`` always stays <= the minimal determinant
order ``alpha_bar``; equality holds exactly when ``Gbar`` keeps full generic
rank, in which case a finite limit law for the Wald statistic exists
("CLDR").  Strict inequality ("DeficientRank") means the statistic diverges.

The leading restriction forms ``gbar`` follow from ``Gbar`` by the Euler
identity ``gbar = Lambda . Gbar(y) . y`` with ``Lambda = diag(1/(alpha_i+1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from . import ratmat
from .errors import RankDeficiencyError
from .poly import EXACT, POS_INFINITY, Polynomial, monomial_exponents
from .polymatrix import (
    DEFAULT_SUBMATRIX_CAP,
    PolyMatrix,
    alpha_bar,
    generic_rank,
    jacobian,
)
from .restrictions import RestrictionSystem

CLDR = "CLDR"
DEFICIENT_RANK = "DeficientRank"


@dataclass(frozen=True)
class CldrAnalysis:
    """Output of the recursive construction."""

    S: ratmat.Mat
    alpha: tuple[int, ...]
    alpha_bar: int
    Gbar: PolyMatrix
    Lambda: tuple[Fraction, ...]
    classification: str
    gbar: tuple[Polynomial, ...] | None = None
    rbar: PolyMatrix | None = None

    @property
    def q(self) -> int:
        return len(self.alpha)

    @property
    def is_cldr(self) -> bool:
        return self.classification == CLDR

    @property
    def min_alpha(self) -> int:
        return min(self.alpha)


def _row_reduce_certificate(
    coeffs: list[list[Fraction]],
) -> tuple[list[list[Fraction]], list[int], list[int]]:
    """Gauss-reduce the rows of ``coeffs`` over the rationals.

    Returns ``(T, kept, zeroed)`` where ``T`` is the nonsingular transform
    applied (``T @ coeffs`` has the ``zeroed`` rows identically zero) and
    ``kept``/``zeroed`` are original row indices in ascending order.
    Pivoting: first nonzero column, then largest absolute numerator.
    """
    nrows = len(coeffs)
    ncols = len(coeffs[0]) if coeffs else 0
    work = [list(row) for row in coeffs]
    transform = [
        [Fraction(int(i == j)) for j in range(nrows)] for i in range(nrows)
    ]
    kept: list[int] = []
    candidates = list(range(nrows))
    for col in range(ncols):
        live = [r for r in candidates if work[r][col] != 0]
        if not live:
            continue
        pivot = max(live, key=lambda r: (abs(work[r][col].numerator), -r))
        kept.append(pivot)
        candidates.remove(pivot)
        inv = 1 / work[pivot][col]
        for r in candidates:
            if work[r][col] != 0:
                factor = work[r][col] * inv
                work[r] = [a - factor * b for a, b in zip(work[r], work[pivot])]
                transform[r] = [
                    a - factor * b for a, b in zip(transform[r], transform[pivot])
                ]
        if not candidates:
            break
    kept.sort()
    zeroed = sorted(candidates)
    return transform, kept, zeroed


def cldr_construct(
    matrix: PolyMatrix, cap: int = DEFAULT_SUBMATRIX_CAP
) -> CldrAnalysis:
    """Run the stage-wise leading-form recursion and classify the matrix.

    Requires exact coefficients and full generic row rank (the recursion
    cannot terminate otherwise).  ``S`` is one valid certificate among many;
    ``alpha``, the classification and the identity ``S.G == Gbar + Rbar``
    are the reproducible parts.
    """
    if matrix.field != EXACT:
        raise ValueError("classification requires exact coefficients")
    q, p = matrix.rows, matrix.cols
    if q > p:
        raise ValueError(f"expected q <= p, got {q} > {p}")
    if generic_rank(matrix) < q:
        raise RankDeficiencyError(
            "matrix does not have full generic row rank (a restriction row "
            "may be identically zero or dependent)"
        )

    nvars = matrix.nvars
    rows: list[tuple[Polynomial, ...]] = [matrix.row(i) for i in range(q)]
    s_total = ratmat.identity(q)
    alpha: list[int] = []
    emitted = 0
    max_degree = max(
        (int(e.degree()) for row in rows for e in row if not e.is_zero()),
        default=0,
    )
    stage_guard = max_degree * q + q + 1

    for _ in range(stage_guard):
        if emitted == q:
            break
        tail = rows[emitted:]
        k = min(entry.lowest_order() for row in tail for entry in row)
        if k == POS_INFINITY:
            raise RankDeficiencyError("remaining rows vanished during reduction")
        k = int(k)
        monomials = monomial_exponents(nvars, k)
        coeffs = [
            [
                entry.homogeneous_component(k).coefficient(m)
                for entry in row
                for m in monomials
            ]
            for row in tail
        ]
        transform, kept, zeroed = _row_reduce_certificate(coeffs)
        if not kept:
            raise RankDeficiencyError("no leading form found at the lowest order")
        # Apply the transform, kept rows first (original relative order).
        order = kept + zeroed
        new_tail = []
        for r in order:
            new_tail.append(
                tuple(
                    sum(
                        (transform[r][s] * tail[s][j] for s in range(len(tail))
                         if transform[r][s] != 0),
                        Polynomial.zero(nvars, EXACT),
                    )
                    for j in range(p)
                )
            )
        rows[emitted:] = new_tail
        stage_s = [
            [transform[r][s] for s in range(len(tail))] for r in order
        ]
        s_total = _block_apply(stage_s, s_total, emitted)
        alpha.extend([k] * len(kept))
        emitted += len(kept)
    if emitted != q:
        raise RankDeficiencyError("leading-form recursion failed to terminate")

    gbar_rows = [
        [rows[i][j].homogeneous_component(alpha[i]) for j in range(p)]
        for i in range(q)
    ]
    gbar_matrix = PolyMatrix(gbar_rows)
    bar = alpha_bar(matrix, cap)
    total = sum(alpha)
    full = generic_rank(gbar_matrix) == q
    # Lemma: the limit matrix keeps full rank iff the shares sum to alpha_bar.
    assert (total == bar) == full, "share sum and limit rank disagree"
    classification = CLDR if full else DEFICIENT_RANK
    return CldrAnalysis(
        S=tuple(tuple(row) for row in s_total),
        alpha=tuple(alpha),
        alpha_bar=int(bar) if bar != POS_INFINITY else bar,
        Gbar=gbar_matrix,
        Lambda=tuple(Fraction(1, a + 1) for a in alpha),
        classification=classification,
    )


def _block_apply(stage: list[list[Fraction]], s_total: ratmat.Mat, offset: int):
    """Left-multiply ``s_total`` by ``blockdiag(I_offset, stage)``."""
    q = len(s_total)
    rows = [list(s_total[i]) for i in range(offset)]
    for srow in stage:
        rows.append(
            [
                sum(srow[s] * s_total[offset + s][j] for s in range(len(srow)))
                for j in range(q)
            ]
        )
    return tuple(tuple(row) for row in rows)


def residual(matrix: PolyMatrix, analysis: CldrAnalysis) -> PolyMatrix:
    """``Rbar = S.G - Gbar``; row i contains only orders above ``alpha[i]``."""
    transformed = matrix.left_mul(analysis.S)
    rbar = transformed - analysis.Gbar
    for i in range(rbar.rows):
        low = min(entry.lowest_order() for entry in rbar.row(i))
        if low <= analysis.alpha[i]:
            raise ValueError("analysis does not match the supplied matrix")
    return rbar


def euler_gbar(analysis: CldrAnalysis) -> tuple[Polynomial, ...]:
    """Leading restriction forms ``Lambda . Gbar(y) . y`` (Euler identity);
    row i is homogeneous of degree ``alpha[i] + 1``."""
    p = analysis.Gbar.cols
    variables = Polynomial.variables(p, analysis.Gbar.field)
    out = []
    for i in range(analysis.q):
        row_dot_y = sum(
            (analysis.Gbar[i, j] * variables[j] for j in range(p)),
            Polynomial.zero(p, analysis.Gbar.field),
        )
        out.append(analysis.Lambda[i] * row_dot_y)
    return tuple(out)


def build_gbar(
    system: RestrictionSystem, analysis: CldrAnalysis
) -> tuple[Polynomial, ...]:
    """Leading restriction forms via the Euler identity.

    Requires the system to be centered (``g(0) = 0``).  Row i is homogeneous
    of degree ``alpha[i] + 1`` and is cross-checked against the homogeneous
    component of ``(S.g)_i`` at that degree.
    """
    origin = (Fraction(0),) * system.p
    for i, gi in enumerate(system.g):
        if gi.evaluate(origin) != 0:
            raise ValueError(
                f"restriction {i + 1} does not vanish at the origin; "
                "shift the system to the tested point first"
            )
    forms = euler_gbar(analysis)
    for i in range(analysis.q):
        sg_i = sum(
            (analysis.S[i][j] * system.g[j] for j in range(system.q)),
            Polynomial.zero(system.p),
        )
        direct = sg_i.homogeneous_component(analysis.alpha[i] + 1)
        assert forms[i] == direct, "Euler form disagrees with the direct component"
    return forms


def analyze_at(
    system: RestrictionSystem,
    theta_bar=None,
    cap: int = DEFAULT_SUBMATRIX_CAP,
) -> tuple[RestrictionSystem, CldrAnalysis]:
    """Shift the system to the tested point and run the full analysis.

    Returns the centered system together with the analysis carrying
    ``gbar`` and ``rbar``.  The point must be a root of every restriction.
    """
    point = theta_bar if theta_bar is not None else system.theta_bar
    if point is None:
        point = (Fraction(0),) * system.p
    shifted = system.shifted(point)
    if shifted.theta_bar is None:
        raise ValueError("the tested point is not a root of the system")
    matrix = jacobian(shifted)
    analysis = cldr_construct(matrix, cap)
    analysis = replace(
        analysis,
        rbar=residual(matrix, analysis),
        gbar=build_gbar(shifted, analysis),
    )
    return shifted, analysis


def analysis_to_json(analysis: CldrAnalysis) -> dict:
    """JSON-ready view: rationals as strings, polynomials in canonical text."""
    payload = {
        "classification": analysis.classification,
        "alpha": list(analysis.alpha),
        "alpha_bar": analysis.alpha_bar,
        "sum_alpha": sum(analysis.alpha),
        "S": [[str(x) for x in row] for row in analysis.S],
        "Lambda": [str(x) for x in analysis.Lambda],
        "Gbar": [
            [analysis.Gbar[i, j].to_text() for j in range(analysis.Gbar.cols)]
            for i in range(analysis.Gbar.rows)
        ],
    }
    if analysis.gbar is not None:
        payload["gbar"] = [g.to_text() for g in analysis.gbar]
    return payload
