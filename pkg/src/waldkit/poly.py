"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial in ``p`` variables is stored as a mapping from exponent tuples
to coefficients:

    t1^2*t2 + 3   (p=2)   ->   {(2, 1): Fraction(1), (0, 0): Fraction(3)}

Two coefficient fields are supported:

* ``EXACT`` -- arbitrary-precision ``Fraction`` coefficients.  All rank,
  order and classification decisions in this package run in this mode,
  because "is this polynomial zero?" must be decidable.
* ``FLOAT`` -- binary64 coefficients, used only in the Monte Carlo layer
  (covariance square roots are irrational).  Construction drops terms whose
  magnitude is below ``FLOAT_EPS`` relative to the largest coefficient.
  Float-mode polynomials are never used for rank or order decisions.

Polynomials are immutable; every operation returns a new canonical value
(no explicit zero terms are ever stored).  Canonical term order is graded
lexicographic, highest degree first, which fixes printing and iteration.

The degree of the zero polynomial is the ``-inf`` sentinel; its lowest
order (smallest degree of a nonzero homogeneous component) is ``+inf``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import ratmat

EXACT = "exact"
FLOAT = "float64"

# Relative magnitude below which a float-mode coefficient is treated as zero.
FLOAT_EPS = 1e-12

NEG_INFINITY = float("-inf")  # degree of the zero polynomial
POS_INFINITY = float("inf")   # lowest order of the zero polynomial

Exponents = tuple[int, ...]


def _grlex_key(exponents: Exponents) -> tuple:
    return (sum(exponents), exponents)


class Polynomial:
    """Immutable sparse polynomial over ``EXACT`` rationals or ``FLOAT``."""

    __slots__ = ("nvars", "field", "_terms", "_hash")

    def __init__(self, nvars: int, terms: dict | Iterable = (), field: str = EXACT):
        if nvars < 1:
            raise ValueError(f"nvars must be >= 1, got {nvars}")
        if field not in (EXACT, FLOAT):
            raise ValueError(f"unknown coefficient field {field!r}")
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict[Exponents, object] = {}
        for exponents, coeff in items:
            exponents = tuple(exponents)
            if len(exponents) != nvars:
                raise ValueError(
                    f"exponent tuple {exponents} has length {len(exponents)}, "
                    f"expected {nvars}"
                )
            if any(e < 0 or not isinstance(e, int) for e in exponents):
                raise ValueError(f"exponents must be non-negative ints: {exponents}")
            coeff = _coerce(coeff, field)
            if exponents in acc:
                acc[exponents] = acc[exponents] + coeff
            else:
                acc[exponents] = coeff
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_terms", _canonical(acc, field))
        object.__setattr__(self, "_hash", None)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, field: str = EXACT) -> "Polynomial":
        return cls(nvars, {}, field)

    @classmethod
    def constant(cls, nvars: int, value, field: str = EXACT) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value}, field)

    @classmethod
    def variable(cls, nvars: int, index: int, field: str = EXACT) -> "Polynomial":
        """The polynomial ``t{index+1}`` (0-based index)."""
        if not 0 <= index < nvars:
            raise ValueError(f"variable index {index} out of range for nvars={nvars}")
        exponents = tuple(1 if j == index else 0 for j in range(nvars))
        return cls(nvars, {exponents: 1}, field)

    @classmethod
    def variables(cls, nvars: int, field: str = EXACT) -> tuple["Polynomial", ...]:
        return tuple(cls.variable(nvars, j, field) for j in range(nvars))

    # -- basic queries -----------------------------------------------------

    def terms(self) -> Iterator[tuple[Exponents, object]]:
        """Terms in graded-lex order, highest degree first."""
        for exponents in sorted(self._terms, key=_grlex_key, reverse=True):
            yield exponents, self._terms[exponents]

    def coefficient(self, exponents: Sequence[int]):
        zero = Fraction(0) if self.field == EXACT else 0.0
        return self._terms.get(tuple(exponents), zero)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> float:
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self._terms:
            return NEG_INFINITY
        return max(sum(e) for e in self._terms)

    def lowest_order(self) -> float:
        """Smallest degree of a nonzero homogeneous component; ``+inf`` if zero."""
        if not self._terms:
            return POS_INFINITY
        return min(sum(e) for e in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.field == other.field
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(
                self, "_hash",
                hash((self.nvars, self.field, frozenset(self._terms.items()))),
            )
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- arithmetic --------------------------------------------------------

    def _compatible(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise ValueError(
                f"ambient dimension mismatch: {self.nvars} vs {other.nvars}"
            )
        if self.field != other.field:
            raise ValueError(f"coefficient field mismatch: {self.field} vs {other.field}")

    def __add__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other, self.field)
        self._compatible(other)
        acc = dict(self._terms)
        for exponents, coeff in other._terms.items():
            acc[exponents] = acc.get(exponents, 0) + coeff
        return Polynomial(self.nvars, acc, self.field)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(
            self.nvars, {e: -c for e, c in self._terms.items()}, self.field
        )

    def __sub__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other, self.field)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            coeff = _coerce(other, self.field)
            return Polynomial(
                self.nvars, {e: c * coeff for e, c in self._terms.items()}, self.field
            )
        self._compatible(other)
        acc: dict[Exponents, object] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                acc[key] = acc.get(key, 0) + ca * cb
        return Polynomial(self.nvars, acc, self.field)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(self.nvars, 1, self.field)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- calculus and structure -------------------------------------------

    def differentiate(self, index: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``index`` (0-based)."""
        if not 0 <= index < self.nvars:
            raise ValueError(f"variable index {index} out of range for nvars={self.nvars}")
        acc: dict[Exponents, object] = {}
        for exponents, coeff in self._terms.items():
            e = exponents[index]
            if e == 0:
                continue
            key = exponents[:index] + (e - 1,) + exponents[index + 1:]
            acc[key] = acc.get(key, 0) + coeff * e
        return Polynomial(self.nvars, acc, self.field)

    def homogeneous_component(self, k: int) -> "Polynomial":
        """The degree-``k`` homogeneous part (zero polynomial if absent)."""
        if k < 0:
            raise ValueError("homogeneous order must be non-negative")
        picked = {e: c for e, c in self._terms.items() if sum(e) == k}
        return Polynomial(self.nvars, picked, self.field)

    def leading_form(self) -> "Polynomial":
        """The homogeneous component at the lowest order.

        This is the pointwise limit of ``lam**k * P(y/lam)`` as ``lam -> inf``
        with ``k`` the lowest order.
        """
        if not self._terms:
            raise ValueError("the zero polynomial has no leading form")
        return self.homogeneous_component(int(self.lowest_order()))

    def evaluate(self, point: Sequence):
        """Term-by-term evaluation; exact when coefficients and point are rational."""
        if len(point) != self.nvars:
            raise ValueError(
                f"point has dimension {len(point)}, expected {self.nvars}"
            )
        total = Fraction(0) if self.field == EXACT else 0.0
        for exponents, coeff in self._terms.items():
            value = coeff
            for x, e in zip(point, exponents):
                if e:
                    value = value * x**e
            total = total + value
        return total

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an ``(n, p)`` float array of points, returning ``(n,)``."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError(f"expected an (n, {self.nvars}) array")
        out = np.zeros(points.shape[0])
        for exponents, coeff in self._terms.items():
            term = np.full(points.shape[0], float(coeff))
            for j, e in enumerate(exponents):
                if e:
                    term *= points[:, j] ** e
            out += term
        return out

    def affine_substitute(self, a, shift=None) -> "Polynomial":
        """Return ``Q(y) = P(A^{-1} y + shift)``, expanded and canonical.

        ``a`` must be a nonsingular p-by-p matrix; in exact mode its entries
        and the shift must be rational.  Degree is preserved.
        """
        n = self.nvars
        if shift is None:
            shift = (0,) * n
        if len(shift) != n:
            raise ValueError("shift has wrong dimension")
        if self.field == EXACT:
            mat = ratmat.as_matrix(a)
            if len(mat) != n or len(mat[0]) != n:
                raise ValueError("substitution matrix has wrong shape")
            if ratmat.det(mat) == 0:
                raise ValueError("substitution matrix is singular")
            inv = ratmat.inverse(mat)
            shift = tuple(ratmat.as_fraction(s) for s in shift)
        else:
            mat = np.asarray(a, dtype=np.float64)
            if mat.shape != (n, n):
                raise ValueError("substitution matrix has wrong shape")
            if abs(np.linalg.det(mat)) == 0.0:
                raise ValueError("substitution matrix is singular")
            inv = np.linalg.inv(mat)
            shift = tuple(float(s) for s in shift)
        replacements = []
        for j in range(n):
            linear = {
                tuple(1 if k == i else 0 for k in range(n)): inv[j][i]
                for i in range(n)
            }
            poly = Polynomial(n, linear, self.field)
            if shift[j]:
                poly = poly + Polynomial.constant(n, shift[j], self.field)
            replacements.append(poly)
        return self.substitute(replacements)

    def substitute(self, replacements: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute variable ``j`` by ``replacements[j]`` and expand."""
        if len(replacements) != self.nvars:
            raise ValueError("one replacement polynomial per variable required")
        n = replacements[0].nvars
        # Cache powers of each replacement: exponents are usually tiny.
        powers: list[dict[int, Polynomial]] = [
            {0: Polynomial.constant(n, 1, self.field)} for _ in replacements
        ]

        def power(j: int, e: int) -> Polynomial:
            cache = powers[j]
            if e not in cache:
                cache[e] = power(j, e - 1) * replacements[j]
            return cache[e]

        total = Polynomial.zero(n, self.field)
        for exponents, coeff in self._terms.items():
            term = Polynomial.constant(n, coeff, self.field)
            for j, e in enumerate(exponents):
                if e:
                    term = term * power(j, e)
            total = total + term
        return total

    # -- conversions and printing ------------------------------------------

    def to_float(self) -> "Polynomial":
        if self.field == FLOAT:
            return self
        return Polynomial(
            self.nvars, {e: float(c) for e, c in self._terms.items()}, FLOAT
        )

    def map_coefficients(self, fn: Callable) -> "Polynomial":
        return Polynomial(
            self.nvars, {e: fn(c) for e, c in self._terms.items()}, self.field
        )

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        """Canonical text form, e.g. ``3*t1^2*t2 - 1/2*t3``."""
        if not self._terms:
            return "0"
        pieces: list[str] = []
        for exponents, coeff in self.terms():
            monomial = "*".join(
                f"t{j + 1}" if e == 1 else f"t{j + 1}^{e}"
                for j, e in enumerate(exponents)
                if e
            )
            negative = coeff < 0
            magnitude = -coeff if negative else coeff
            if monomial:
                body = monomial if magnitude == 1 else f"{_coeff_text(magnitude)}*{monomial}"
            else:
                body = _coeff_text(magnitude)
            if not pieces:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(pieces)


def _coeff_text(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


def _coerce(coeff, field: str):
    if field == EXACT:
        if isinstance(coeff, float):
            raise TypeError(
                "float coefficient in exact mode; use Fraction or the FLOAT field"
            )
        return ratmat.as_fraction(coeff)
    value = float(coeff)
    if not math.isfinite(value):
        raise ValueError("float coefficients must be finite")
    return value


def _canonical(terms: dict, field: str) -> dict:
    if field == EXACT:
        return {e: c for e, c in terms.items() if c != 0}
    if not terms:
        return {}
    largest = max(abs(c) for c in terms.values())
    if largest == 0.0:
        return {}
    cutoff = FLOAT_EPS * largest
    return {e: c for e, c in terms.items() if abs(c) > cutoff}


def monomial_exponents(nvars: int, degree: int) -> list[Exponents]:
    """All exponent tuples of the given total degree, in canonical (descending
    graded-lex) order."""
    out: list[Exponents] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, slots - 1)

    rec((), degree, nvars)
    return out
