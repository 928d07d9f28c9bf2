"""Restriction systems and the ``.wrs`` text format.

A restriction system is ``q`` polynomial restrictions ``g_1 .. g_q`` in
``p`` variables ``t1 .. tp`` (``q <= p``), optionally with a tested point
``theta_bar`` (which must be an exact root of every restriction) and a
positive-definite covariance ``V``.

File grammar (extension ``.wrs``)::

    p=<int> q=<int>
    <polynomial>          (q lines, over t1..tp)
    theta_bar= <p numbers>            (optional)
    V=                                (optional, p*p numbers row-major)
    <number> ... <number>

Polynomial bodies allow integer and rational (``a/b``) literals, the
operators ``+ - * ^`` and parentheses; ``^`` takes a non-negative integer
exponent.  Precedence is ``^``, then unary minus, then ``*``, then ``+ -``.
Decimal literals are rejected in bodies (coefficients stay exact) but are
accepted in the ``theta_bar`` and ``V`` blocks.  Blank lines and ``#``
comments are ignored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ParseError
from .poly import EXACT, Polynomial

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RestrictionSystem:
    """A validated system of polynomial restrictions."""

    p: int
    q: int
    g: tuple[Polynomial, ...]
    theta_bar: tuple[Fraction, ...] | None = None
    V: np.ndarray | None = None

    def __post_init__(self):
        if self.q > self.p:
            raise ValueError(f"q={self.q} exceeds p={self.p}")
        if len(self.g) != self.q:
            raise ValueError(f"expected {self.q} restrictions, got {len(self.g)}")
        for i, gi in enumerate(self.g):
            if gi.nvars != self.p:
                raise ValueError(f"restriction {i + 1} has ambient dimension "
                                 f"{gi.nvars}, expected {self.p}")
            if gi.field != EXACT:
                raise ValueError("restrictions must use exact coefficients")
        if self.theta_bar is not None:
            if len(self.theta_bar) != self.p:
                raise ValueError("theta_bar has wrong dimension")
            object.__setattr__(
                self, "theta_bar", tuple(Fraction(x) for x in self.theta_bar)
            )
            for i, gi in enumerate(self.g):
                if gi.evaluate(self.theta_bar) != 0:
                    raise ValueError(
                        f"theta_bar is not a root of restriction {i + 1}"
                    )
        if self.V is not None:
            v = np.asarray(self.V, dtype=np.float64)
            if v.shape != (self.p, self.p):
                raise ValueError("V has wrong shape")
            scale = max(1.0, float(np.max(np.abs(v))))
            if float(np.max(np.abs(v - v.T))) > SYMMETRY_TOL * scale:
                raise ValueError("V is not symmetric")
            if float(np.min(np.linalg.eigvalsh(v))) <= 0.0:
                raise ValueError("V is not positive definite")
            object.__setattr__(self, "V", v)

    @property
    def max_order(self) -> int:
        """Maximal polynomial order across the restrictions."""
        degrees = [gi.degree() for gi in self.g if not gi.is_zero()]
        return int(max(degrees)) if degrees else 0

    def shifted(self, point: Sequence) -> "RestrictionSystem":
        """Re-center at ``point``: new restrictions ``y -> g(y + point)``.

        If ``point`` is a root of the system the result satisfies
        ``g(0) = 0`` and carries ``theta_bar = 0``.
        """
        point = tuple(Fraction(x) for x in point)
        if len(point) != self.p:
            raise ValueError("shift point has wrong dimension")
        identity = [[Fraction(int(i == j)) for j in range(self.p)] for i in range(self.p)]
        new_g = tuple(gi.affine_substitute(identity, point) for gi in self.g)
        at_root = all(gi.evaluate(point) == 0 for gi in self.g)
        new_theta = (Fraction(0),) * self.p if at_root else None
        return RestrictionSystem(self.p, self.q, new_g, new_theta, self.V)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RestrictionSystem):
            return NotImplemented
        if (self.p, self.q, self.g, self.theta_bar) != (
            other.p, other.q, other.g, other.theta_bar
        ):
            return False
        if (self.V is None) != (other.V is None):
            return False
        return self.V is None or bool(np.array_equal(self.V, other.V))

    def content_hash(self) -> str:
        return hashlib.sha256(format_system(self).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Tokenizer / recursive-descent parser for polynomial bodies
# ---------------------------------------------------------------------------

_OPERATORS = set("+-*^()")


class _Token:
    __slots__ = ("kind", "value", "column")

    def __init__(self, kind: str, value, column: int):
        self.kind = kind      # 'int', 'rational', 'name', or the operator itself
        self.value = value
        self.column = column


def _tokenize_body(text: str, line_no: int) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        col = i + 1
        if ch in _OPERATORS:
            tokens.append(_Token(ch, ch, col))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                raise ParseError(
                    "decimal literals are not allowed in restriction bodies",
                    line_no, j + 1,
                )
            if j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                k = j + 1
                while k < n and text[k].isdigit():
                    k += 1
                tokens.append(
                    _Token("rational", Fraction(int(text[i:j]), int(text[j + 1:k])), col)
                )
                i = k
            else:
                tokens.append(_Token("int", int(text[i:j]), col))
                i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], col))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line_no, col)
    tokens.append(_Token("end", None, n + 1))
    return tokens


class _BodyParser:
    def __init__(self, tokens: list[_Token], nvars: int, line_no: int):
        self.tokens = tokens
        self.pos = 0
        self.nvars = nvars
        self.line_no = line_no

    @property
    def token(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.line_no, self.token.column)

    def parse(self) -> Polynomial:
        value = self.expr()
        if self.token.kind != "end":
            self.fail(f"unexpected {self.token.value!r}")
        return value

    def expr(self) -> Polynomial:
        value = self.term()
        while self.token.kind in "+-":
            op = self.advance().kind
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Polynomial:
        value = self.factor()
        while self.token.kind == "*":
            self.advance()
            value = value * self.factor()
        return value

    def factor(self) -> Polynomial:
        if self.token.kind == "-":
            self.advance()
            return -self.factor()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.token.kind == "^":
            self.advance()
            if self.token.kind != "int":
                self.fail("exponent must be a non-negative integer")
            exponent = self.advance().value
            return base**exponent
        return base

    def atom(self) -> Polynomial:
        tok = self.token
        if tok.kind in ("int", "rational"):
            self.advance()
            return Polynomial.constant(self.nvars, tok.value)
        if tok.kind == "name":
            self.advance()
            name = tok.value
            if name.startswith("t") and name[1:].isdigit():
                index = int(name[1:])
                if 1 <= index <= self.nvars:
                    return Polynomial.variable(self.nvars, index - 1)
                raise ParseError(
                    f"variable {name} out of range (p={self.nvars})",
                    self.line_no, tok.column,
                )
            raise ParseError(f"unknown name {name!r}", self.line_no, tok.column)
        if tok.kind == "(":
            self.advance()
            value = self.expr()
            if self.token.kind != ")":
                self.fail("expected ')'")
            self.advance()
            return value
        self.fail(f"unexpected {tok.value!r}" if tok.kind != "end" else "unexpected end of line")


def parse_polynomial(text: str, nvars: int, line_no: int = 1) -> Polynomial:
    """Parse one polynomial body over ``t1..t<nvars>``."""
    return _BodyParser(_tokenize_body(text, line_no), nvars, line_no).parse()


# ---------------------------------------------------------------------------
# System-level parsing
# ---------------------------------------------------------------------------


def _parse_block_number(token: str, line_no: int, column: int, exact: bool):
    try:
        if "/" in token:
            return Fraction(token)
        if "." in token or "e" in token or "E" in token:
            decimal = Decimal(token)
            return Fraction(decimal) if exact else float(decimal)
        return Fraction(int(token)) if exact else float(int(token))
    except (ValueError, InvalidOperation, ZeroDivisionError):
        raise ParseError(f"bad numeric literal {token!r}", line_no, column) from None


def parse_system(text: str) -> RestrictionSystem:
    """Parse ``.wrs`` text into a validated :class:`RestrictionSystem`."""
    lines = text.splitlines()
    # (line_no, content) with blanks and comments removed
    meaningful = [
        (idx + 1, line) for idx, line in enumerate(lines)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not meaningful:
        raise ParseError("empty input", 1, 1)

    header_no, header = meaningful[0]
    fields = header.split()
    if (
        len(fields) != 2
        or not fields[0].startswith("p=")
        or not fields[1].startswith("q=")
    ):
        raise ParseError("expected header 'p=<int> q=<int>'", header_no, 1)
    try:
        p = int(fields[0][2:])
        q = int(fields[1][2:])
    except ValueError:
        raise ParseError("expected header 'p=<int> q=<int>'", header_no, 1) from None
    if p < 1 or q < 1:
        raise ParseError("p and q must be positive", header_no, 1)
    if q > p:
        raise ParseError(f"q={q} exceeds p={p}", header_no, 1)

    body = meaningful[1:]
    if len(body) < q:
        raise ParseError(
            f"expected {q} restriction lines, found {len(body)}",
            body[-1][0] if body else header_no, 1,
        )
    restrictions = [
        parse_polynomial(line, p, line_no) for line_no, line in body[:q]
    ]

    theta_bar: tuple[Fraction, ...] | None = None
    v_matrix: np.ndarray | None = None
    # Remaining lines form optional blocks; numbers may continue on
    # subsequent lines until the block is full.
    stream: list[tuple[int, int, str]] = []
    for line_no, line in body[q:]:
        offset = 0
        for raw in line.split():
            idx = line.index(raw, offset)
            stream.append((line_no, idx + 1, raw))
            offset = idx + len(raw)
    i = 0
    while i < len(stream):
        line_no, column, token = stream[i]
        if token.startswith("theta_bar="):
            if theta_bar is not None:
                raise ParseError("duplicate theta_bar block", line_no, column)
            rest = token[len("theta_bar="):]
            numbers: list[Fraction] = []
            if rest:
                numbers.append(_parse_block_number(rest, line_no, column, exact=True))
            i += 1
            while len(numbers) < p:
                if i >= len(stream):
                    raise ParseError("theta_bar block is incomplete", line_no, column)
                ln, col, tok = stream[i]
                numbers.append(_parse_block_number(tok, ln, col, exact=True))
                i += 1
            theta_bar = tuple(numbers)
        elif token.startswith("V="):
            if v_matrix is not None:
                raise ParseError("duplicate V block", line_no, column)
            rest = token[len("V="):]
            values: list[float] = []
            if rest:
                values.append(float(_parse_block_number(rest, line_no, column, exact=False)))
            i += 1
            while len(values) < p * p:
                if i >= len(stream):
                    raise ParseError("V block is incomplete", line_no, column)
                ln, col, tok = stream[i]
                values.append(float(_parse_block_number(tok, ln, col, exact=False)))
                i += 1
            v_matrix = np.array(values, dtype=np.float64).reshape(p, p)
        else:
            raise ParseError(f"unexpected trailing content {token!r}", line_no, column)

    try:
        return RestrictionSystem(p, q, tuple(restrictions), theta_bar, v_matrix)
    except ValueError as exc:
        raise ParseError(str(exc), header_no, 1) from None


def format_system(system: RestrictionSystem) -> str:
    """Canonical text; ``parse_system(format_system(s)) == s``."""
    lines = [f"p={system.p} q={system.q}"]
    lines.extend(gi.to_text() for gi in system.g)
    if system.theta_bar is not None:
        lines.append("theta_bar= " + " ".join(str(x) for x in system.theta_bar))
    if system.V is not None:
        lines.append("V=")
        for row in system.V:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def load_system(path) -> RestrictionSystem:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_system(handle.read())


def save_system(system: RestrictionSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_system(system))
