"""Exact arithmetic over Q(sqrt 2) and noncommutative operator polynomials.

The scalar field is the quadratic extension of the rationals by sqrt(2),
which is where all the exact constants of the (2,2,2) Bell analysis live.
Operator polynomials are formal words in the four dichotomic observables
A0, A1, B0, B1 subject only to the rules letter^2 = 1 and cross-party
commutation [A_x, B_y] = 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

# Rational approximation of sqrt(2), good to ~1e-40 relative error.  Used
# only to convert exact scalars to correctly-rounded doubles.
_SQRT2_RATIONAL = Fraction(math.isqrt(2 * 10**80), 10**40)

RationalLike = Union[int, Fraction]


@dataclass(frozen=True)
class Q2Scalar:
    """Exact number p + q*sqrt(2) with rational p, q."""

    p: Fraction
    q: Fraction

    def __init__(self, p: RationalLike = 0, q: RationalLike = 0) -> None:
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))

    # -- constructors -----------------------------------------------------

    @staticmethod
    def sqrt2() -> "Q2Scalar":
        return Q2Scalar(0, 1)

    @staticmethod
    def inv_sqrt2() -> "Q2Scalar":
        return Q2Scalar(0, Fraction(1, 2))

    # -- ring / field operations -----------------------------------------

    def __add__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Q2Scalar(self.p + other.p, self.q + other.q)

    __radd__ = __add__

    def __sub__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Q2Scalar(self.p - other.p, self.q - other.q)

    def __rsub__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        return -self + other

    def __neg__(self) -> "Q2Scalar":
        return Q2Scalar(-self.p, -self.q)

    def __mul__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Q2Scalar(
            self.p * other.p + 2 * self.q * other.q,
            self.p * other.q + self.q * other.p,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Q2Scalar":
        # (p + q s)^-1 = (p - q s) / (p^2 - 2 q^2); the norm vanishes only
        # for the zero element since sqrt(2) is irrational.
        norm = self.p * self.p - 2 * self.q * self.q
        if norm == 0:
            raise ZeroDivisionError("inversion of zero in Q(sqrt2)")
        return Q2Scalar(self.p / norm, -self.q / norm)

    def __truediv__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: "Q2Scalar | RationalLike") -> "Q2Scalar":
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "Q2Scalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = Q2Scalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order and conversion --------------------------------------------

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def sign(self) -> int:
        """Exact sign of p + q*sqrt(2): -1, 0 or +1."""
        if self.q == 0:
            return (self.p > 0) - (self.p < 0)
        if self.p == 0:
            return 1 if self.q > 0 else -1
        if self.p > 0 and self.q > 0:
            return 1
        if self.p < 0 and self.q < 0:
            return -1
        # Opposite signs: compare p^2 with 2 q^2; equality would mean
        # sqrt(2) is rational.
        diff = self.p * self.p - 2 * self.q * self.q
        assert diff != 0, "p^2 = 2 q^2 is impossible for nonzero rationals"
        return (1 if diff > 0 else -1) * (1 if self.p > 0 else -1)

    def __float__(self) -> float:
        return float(self.p + self.q * _SQRT2_RATIONAL)

    def to_float(self) -> float:
        return float(self)

    def abs(self) -> "Q2Scalar":
        return self if self.sign() >= 0 else -self

    def __lt__(self, other: "Q2Scalar | RationalLike") -> bool:
        return (self - _coerce(other)).sign() < 0

    def __le__(self, other: "Q2Scalar | RationalLike") -> bool:
        return (self - _coerce(other)).sign() <= 0

    def __gt__(self, other: "Q2Scalar | RationalLike") -> bool:
        return (self - _coerce(other)).sign() > 0

    def __ge__(self, other: "Q2Scalar | RationalLike") -> bool:
        return (self - _coerce(other)).sign() >= 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Q2Scalar(other)
        if not isinstance(other, Q2Scalar):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __hash__(self) -> int:
        return hash((self.p, self.q))

    # -- text format ------------------------------------------------------

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"Q2Scalar({self.p!r}, {self.q!r})"


def _coerce(x: "Q2Scalar | RationalLike"):
    if isinstance(x, Q2Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Q2Scalar(x)
    return NotImplemented


ZERO = Q2Scalar(0)
ONE = Q2Scalar(1)
SQRT2 = Q2Scalar.sqrt2()
INV_SQRT2 = Q2Scalar.inv_sqrt2()


def format_scalar(x: Q2Scalar) -> str:
    """Whitespace-free exact text form: ``p/q`` or ``p/q+r/t*s2``."""
    p = f"{x.p.numerator}/{x.p.denominator}"
    if x.q == 0:
        return p
    sign = "+" if x.q > 0 else "-"
    qa = abs(x.q)
    return f"{p}{sign}{qa.numerator}/{qa.denominator}*s2"


_SCALAR_RE = re.compile(
    r"^(-?\d+/\d+)(?:([+-])(\d+/\d+)\*s2)?$"
)


def parse_scalar(text: str) -> Q2Scalar:
    """Inverse of :func:`format_scalar`; round-trip is bit-exact."""
    m = _SCALAR_RE.match(text.strip())
    if m is None:
        raise ValueError(f"malformed exact scalar: {text!r}")
    p = Fraction(m.group(1))
    q = Fraction(0)
    if m.group(2) is not None:
        q = Fraction(m.group(3))
        if m.group(2) == "-":
            q = -q
    return Q2Scalar(p, q)


# ---------------------------------------------------------------------------
# Monomials: words over {A0, A1, B0, B1} in normal form.
# ---------------------------------------------------------------------------

def _reduce_word(word: Iterable[int]) -> tuple[int, ...]:
    # Letters square to the identity, so adjacent equal letters cancel.
    out: list[int] = []
    for letter in word:
        if out and out[-1] == letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True)
class Monomial:
    """Normal-form word: A-letters first, then B-letters, no repeats."""

    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        assert self.a == _reduce_word(self.a)
        assert self.b == _reduce_word(self.b)

    @staticmethod
    def unit() -> "Monomial":
        return Monomial()

    @staticmethod
    def letter(name: str) -> "Monomial":
        party, idx = name[0], int(name[1])
        if party == "A":
            return Monomial(a=(idx,))
        if party == "B":
            return Monomial(b=(idx,))
        raise ValueError(f"unknown letter {name!r}")

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(_reduce_word(self.a + other.a),
                        _reduce_word(self.b + other.b))

    def adjoint(self) -> "Monomial":
        # Generators are hermitian, so the adjoint reverses each word.
        return Monomial(self.a[::-1], self.b[::-1])

    @property
    def degree(self) -> int:
        return len(self.a) + len(self.b)

    def sort_key(self) -> tuple:
        return (self.degree, len(self.b), self.a, self.b)

    def __str__(self) -> str:
        if not self.a and not self.b:
            return "1"
        return "".join(f"A{i}" for i in self.a) + "".join(f"B{j}" for j in self.b)


UNIT = Monomial.unit()
A0 = Monomial.letter("A0")
A1 = Monomial.letter("A1")
B0 = Monomial.letter("B0")
B1 = Monomial.letter("B1")


# ---------------------------------------------------------------------------
# Polynomials.
# ---------------------------------------------------------------------------

CoeffLike = Union[Q2Scalar, int, Fraction]


class Polynomial:
    """Finite Q(sqrt2)-linear combination of normal-form monomials.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, CoeffLike] | None = None) -> None:
        clean: dict[Monomial, Q2Scalar] = {}
        if terms:
            for mono, coeff in terms.items():
                c = _as_scalar(coeff)
                if not c.is_zero():
                    clean[mono] = c
        self._terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial()

    @staticmethod
    def one() -> "Polynomial":
        return Polynomial({UNIT: ONE})

    @staticmethod
    def monomial(mono: Monomial, coeff: CoeffLike = 1) -> "Polynomial":
        return Polynomial({mono: coeff})

    @staticmethod
    def letter(name: str) -> "Polynomial":
        return Polynomial.monomial(Monomial.letter(name))

    # -- inspection -------------------------------------------------------

    def terms(self) -> dict[Monomial, Q2Scalar]:
        return dict(self._terms)

    def coefficient(self, mono: Monomial) -> Q2Scalar:
        return self._terms.get(mono, ZERO)

    def monomials(self) -> list[Monomial]:
        return sorted(self._terms, key=Monomial.sort_key)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self._terms)
        for mono, coeff in other._terms.items():
            out[mono] = out.get(mono, ZERO) + coeff
        return Polynomial(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self._terms.items()})

    def __mul__(self, other: "Polynomial | CoeffLike") -> "Polynomial":
        if isinstance(other, (Q2Scalar, int, Fraction)):
            return self.scale(other)
        out: dict[Monomial, Q2Scalar] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = m1 * m2
                out[mono] = out.get(mono, ZERO) + c1 * c2
        return Polynomial(out)

    def __rmul__(self, other: CoeffLike) -> "Polynomial":
        return self.scale(other)

    def scale(self, coeff: CoeffLike) -> "Polynomial":
        c = _as_scalar(coeff)
        return Polynomial({m: c * v for m, v in self._terms.items()})

    def adjoint(self) -> "Polynomial":
        return Polynomial({m.adjoint(): c for m, c in self._terms.items()})

    def substitute(self, mapping: Mapping[str, tuple[int, str]]) -> "Polynomial":
        """Signed relabeling of letters, e.g. {"A0": (-1, "B1"), ...}.

        Letters not in the mapping are left unchanged.  The image is
        renormalized (cross-party letters commuted back into A-then-B
        order, squares cancelled) with signs folded into coefficients.
        """
        out = Polynomial.zero()
        for mono, coeff in self._terms.items():
            sign = 1
            a_word: list[int] = []
            b_word: list[int] = []
            letters = [f"A{i}" for i in mono.a] + [f"B{j}" for j in mono.b]
            for name in letters:
                s, image = mapping.get(name, (1, name))
                sign *= s
                if image[0] == "A":
                    a_word.append(int(image[1]))
                else:
                    b_word.append(int(image[1]))
            image_mono = Monomial(_reduce_word(a_word), _reduce_word(b_word))
            out = out + Polynomial.monomial(image_mono, coeff * sign)
        return out

    # -- equality / text --------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"


def _as_scalar(x: CoeffLike) -> Q2Scalar:
    return x if isinstance(x, Q2Scalar) else Q2Scalar(x)


def format_polynomial(poly: Polynomial) -> str:
    """Terms ``coef*word`` joined by `` + ``/`` - ``.

    A coefficient p + q*sqrt2 with both parts nonzero is emitted as two
    terms (rational part, then ``r/t*s2`` part) so each printed
    coefficient is a plain rational, optionally tagged ``*s2``.
    """
    if poly.is_zero():
        return "0/1*1"
    pieces: list[tuple[int, str]] = []  # (sign, body)
    for mono in poly.monomials():
        coeff = poly.coefficient(mono)
        word = str(mono)
        for part, tag in ((coeff.p, ""), (coeff.q, "*s2")):
            if part == 0:
                continue
            sign = 1 if part > 0 else -1
            mag = abs(part)
            pieces.append((sign, f"{mag.numerator}/{mag.denominator}{tag}*{word}"))
    out = []
    for i, (sign, body) in enumerate(pieces):
        if i == 0:
            out.append(("-" if sign < 0 else "") + body)
        else:
            out.append((" - " if sign < 0 else " + ") + body)
    return "".join(out)


_TERM_RE = re.compile(
    r"^(\d+/\d+)(\*s2)?(?:\*(1|(?:[AB][01])+))?$"
)


def parse_polynomial(text: str) -> Polynomial:
    """Inverse of :func:`format_polynomial`."""
    text = text.strip()
    if not text:
        raise ValueError("empty polynomial string")
    # Split into signed terms at top-level +/- (no parentheses in grammar).
    chunks: list[tuple[int, str]] = []
    sign = 1
    buf: list[str] = []
    for i, ch in enumerate(text):
        if ch in "+-" and i > 0 and text[i - 1] not in "+-*/" and buf:
            chunks.append((sign, "".join(buf).strip()))
            sign = 1 if ch == "+" else -1
            buf = []
        elif ch in "+-" and not buf:
            sign = sign * (1 if ch == "+" else -1)
        else:
            buf.append(ch)
    chunks.append((sign, "".join(buf).strip()))

    poly = Polynomial.zero()
    for sgn, chunk in chunks:
        chunk = chunk.replace(" ", "")
        m = _TERM_RE.match(chunk)
        if m is None:
            raise ValueError(f"malformed polynomial term: {chunk!r}")
        mag = Fraction(m.group(1))
        coeff = Q2Scalar(0, mag) if m.group(2) else Q2Scalar(mag)
        word = m.group(3) or "1"
        mono = UNIT
        if word != "1":
            for k in range(0, len(word), 2):
                mono = mono * Monomial.letter(word[k:k + 2])
        poly = poly + Polynomial.monomial(mono, coeff * sgn)
    return poly
