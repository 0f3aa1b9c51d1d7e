"""Behaviors and Bell expressions of the (2,2,2) scenario.

A behavior is the table of 8 correlators (two marginals per party plus
four joint correlators); a Bell expression is the dual object with 8
coefficients.  Both come in an exact kind (entries in Q(sqrt2)) and a
float kind; mixing promotes to float.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .algebra import (
    INV_SQRT2,
    ONE,
    UNIT,
    Monomial,
    Polynomial,
    Q2Scalar,
    ZERO,
    format_scalar,
    parse_scalar,
)

Entry = Union[Q2Scalar, float]

# Canonical flattening order of the 8 correlators.
VECTOR_ORDER = ("mA0", "mA1", "mB0", "mB1", "K00", "K01", "K10", "K11")

_MONO_A = (Monomial.letter("A0"), Monomial.letter("A1"))
_MONO_B = (Monomial.letter("B0"), Monomial.letter("B1"))


def _is_exact(entries: Iterable[Entry]) -> bool:
    return all(isinstance(e, Q2Scalar) for e in entries)


def _to_float(e: Entry) -> float:
    return float(e)


@dataclass(frozen=True)
class Behavior:
    """Correlator table: marginals mA, mB and joint correlators K[x][y]."""

    mA: tuple[Entry, Entry]
    mB: tuple[Entry, Entry]
    K: tuple[tuple[Entry, Entry], tuple[Entry, Entry]]

    @property
    def kind(self) -> str:
        return "exact" if _is_exact(self.entries()) else "float"

    def entries(self) -> tuple[Entry, ...]:
        return (*self.mA, *self.mB, *self.K[0], *self.K[1])

    def as_vector(self) -> np.ndarray:
        return np.array([_to_float(e) for e in self.entries()])

    def to_float(self) -> "Behavior":
        return behavior_from_vector(self.as_vector())

    def distance(self, other: "Behavior") -> float:
        return float(np.linalg.norm(self.as_vector() - other.as_vector()))


@dataclass(frozen=True)
class BellExpression:
    """Bell functional: coefficients a_x, b_y, c_xy."""

    a: tuple[Entry, Entry]
    b: tuple[Entry, Entry]
    c: tuple[tuple[Entry, Entry], tuple[Entry, Entry]]

    @property
    def kind(self) -> str:
        return "exact" if _is_exact(self.entries()) else "float"

    def entries(self) -> tuple[Entry, ...]:
        return (*self.a, *self.b, *self.c[0], *self.c[1])

    def as_vector(self) -> np.ndarray:
        return np.array([_to_float(e) for e in self.entries()])

    def to_float(self) -> "BellExpression":
        return expression_from_vector(self.as_vector())

    def scale(self, factor: Entry) -> "BellExpression":
        def mul(e: Entry) -> Entry:
            if isinstance(e, Q2Scalar) and isinstance(factor, Q2Scalar):
                return e * factor
            return _to_float(e) * _to_float(factor)

        return _expression_from_entries([mul(e) for e in self.entries()])

    def __add__(self, other: "BellExpression") -> "BellExpression":
        def add(x: Entry, y: Entry) -> Entry:
            if isinstance(x, Q2Scalar) and isinstance(y, Q2Scalar):
                return x + y
            return _to_float(x) + _to_float(y)

        return _expression_from_entries(
            [add(x, y) for x, y in zip(self.entries(), other.entries())]
        )

    def __sub__(self, other: "BellExpression") -> "BellExpression":
        return self + other.scale(Q2Scalar(-1))

    def to_polynomial(self) -> Polynomial:
        """The expression as a formal degree-<=2 operator polynomial."""
        if self.kind != "exact":
            raise ValueError("only exact expressions embed into the algebra")
        terms: dict[Monomial, Q2Scalar] = {}
        for x in range(2):
            terms[_MONO_A[x]] = self.a[x]
        for y in range(2):
            terms[_MONO_B[y]] = self.b[y]
        for x in range(2):
            for y in range(2):
                terms[_MONO_A[x] * _MONO_B[y]] = self.c[x][y]
        return Polynomial(terms)


def _entries_to_tables(entries: list[Entry]):
    a = (entries[0], entries[1])
    b = (entries[2], entries[3])
    k = ((entries[4], entries[5]), (entries[6], entries[7]))
    return a, b, k


def _expression_from_entries(entries: list[Entry]) -> BellExpression:
    a, b, c = _entries_to_tables(entries)
    return BellExpression(a, b, c)


def _behavior_from_entries(entries: list[Entry]) -> Behavior:
    mA, mB, K = _entries_to_tables(entries)
    return Behavior(mA, mB, K)


def behavior_from_vector(vec: np.ndarray) -> Behavior:
    return _behavior_from_entries([float(v) for v in vec])


def expression_from_vector(vec: np.ndarray) -> BellExpression:
    return _expression_from_entries([float(v) for v in vec])


def expression_from_polynomial(poly: Polynomial) -> BellExpression:
    """Read the 8 coefficients back from a degree-<=2 polynomial.

    The polynomial must contain no constant term and no words outside
    {A_x, B_y, A_x B_y}.
    """
    allowed = {m: i for i, m in enumerate(
        [_MONO_A[0], _MONO_A[1], _MONO_B[0], _MONO_B[1],
         _MONO_A[0] * _MONO_B[0], _MONO_A[0] * _MONO_B[1],
         _MONO_A[1] * _MONO_B[0], _MONO_A[1] * _MONO_B[1]]
    )}
    entries: list[Entry] = [ZERO] * 8
    for mono, coeff in poly.terms().items():
        if mono not in allowed:
            raise ValueError(f"monomial {mono} outside the Bell-expression span")
        entries[allowed[mono]] = coeff
    a = (entries[0], entries[1])
    b = (entries[2], entries[3])
    c = ((entries[4], entries[5]), (entries[6], entries[7]))
    return BellExpression(a, b, c)


def chsh_expression() -> BellExpression:
    """beta_CHSH = (A0+A1)B0 + (A0-A1)B1, exact."""
    one, mone = ONE, -ONE
    return BellExpression(
        a=(ZERO, ZERO),
        b=(ZERO, ZERO),
        c=((one, one), (one, mone)),
    )


def tsirelson_point() -> Behavior:
    """The unique quantum behavior with CHSH value 2*sqrt(2), exact."""
    h = INV_SQRT2
    return Behavior(
        mA=(ZERO, ZERO),
        mB=(ZERO, ZERO),
        K=((h, h), (h, -h)),
    )


# ---------------------------------------------------------------------------
# Local polytope.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalVertexIndex:
    """Deterministic-strategy label (i, j, k, l) with entries +-1."""

    i: int
    j: int
    k: int
    l: int

    def __post_init__(self) -> None:
        if any(v not in (-1, 1) for v in (self.i, self.j, self.k, self.l)):
            raise ValueError("vertex indices must be +-1")


def all_local_vertices() -> list[LocalVertexIndex]:
    return [
        LocalVertexIndex(i, j, k, l)
        for i, j, k, l in itertools.product((-1, 1), repeat=4)
    ]


def local_vertex(idx: LocalVertexIndex) -> Behavior:
    """Deterministic behavior: mB = (i, j), mA = (k, l), K[x][y] = mA[x] mB[y]."""
    i, j, k, l = (Q2Scalar(v) for v in (idx.i, idx.j, idx.k, idx.l))
    return Behavior(
        mA=(k, l),
        mB=(i, j),
        K=((k * i, k * j), (l * i, l * j)),
    )


# ---------------------------------------------------------------------------
# Pairing and bounds.
# ---------------------------------------------------------------------------

def pair(expr: BellExpression, beh: Behavior) -> Entry:
    """The canonical dual pairing sum(coeff * correlator)."""
    e1, e2 = expr.entries(), beh.entries()
    if _is_exact(e1) and _is_exact(e2):
        return sum((x * y for x, y in zip(e1, e2)), ZERO)
    return float(np.dot(expr.as_vector(), beh.as_vector()))


def local_bound(
    expr: BellExpression, *, tol: float = 1e-9
) -> tuple[Entry, list[LocalVertexIndex]]:
    """Max of the expression over the 16 deterministic vertices.

    Returns the bound and every argmax vertex (exact ties for the exact
    kind, absolute tolerance ``tol`` otherwise).
    """
    exact = expr.kind == "exact"
    values = [(idx, pair(expr, local_vertex(idx))) for idx in all_local_vertices()]
    if exact:
        best = values[0][1]
        for _, v in values[1:]:
            if (v - best).sign() > 0:
                best = v
        argmax = [idx for idx, v in values if v == best]
    else:
        floats = [(idx, float(v)) for idx, v in values]
        best = max(v for _, v in floats)
        argmax = [idx for idx, v in floats if v >= best - tol]
    return best, argmax


# ---------------------------------------------------------------------------
# Qubit realizations in the Z-X plane.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitParams:
    """State angle theta and measurement angles (a0, a1, b0, b1).

    Each angle phi labels the observable cos(phi) Z + sin(phi) X; the
    state is cos(theta)|00> + sin(theta)|11>.
    """

    theta: float
    a0: float
    a1: float
    b0: float
    b1: float

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.a0, self.a1, self.b0, self.b1])

    @staticmethod
    def from_array(vec: np.ndarray) -> "QubitParams":
        return QubitParams(*(float(v) for v in vec))


def tsirelson_params() -> QubitParams:
    """Canonical parameters realizing the Tsirelson point."""
    return QubitParams(math.pi / 4, math.pi / 4, -math.pi / 4, 0.0, math.pi / 2)


def behavior_from_qubit(params: QubitParams) -> Behavior:
    """Statistics of the two-qubit Z-X realization (float kind)."""
    t2 = 2.0 * params.theta
    c2t, s2t = math.cos(t2), math.sin(t2)
    ca = (math.cos(params.a0), math.cos(params.a1))
    sa = (math.sin(params.a0), math.sin(params.a1))
    cb = (math.cos(params.b0), math.cos(params.b1))
    sb = (math.sin(params.b0), math.sin(params.b1))
    mA = (c2t * ca[0], c2t * ca[1])
    mB = (c2t * cb[0], c2t * cb[1])
    K = tuple(
        tuple(ca[x] * cb[y] + s2t * sa[x] * sb[y] for y in range(2))
        for x in range(2)
    )
    return Behavior(mA, mB, K)  # type: ignore[arg-type]


def qubit_value(expr: BellExpression, params: QubitParams) -> float:
    """pair(expr, behavior_from_qubit(params)) without object overhead."""
    return float(np.dot(expr.as_vector(), behavior_from_qubit(params).as_vector()))


def grad_qubit(
    expr: BellExpression,
    params: QubitParams,
    mode: str = "analytic",
) -> np.ndarray:
    """Gradient of params -> pair(expr, behavior_from_qubit(params)).

    ``mode`` is "analytic" (closed-form trig derivatives) or
    "finite_difference" (central differences, step 1e-5).
    """
    if mode == "finite_difference":
        return _fd_gradient(lambda p: qubit_value(expr, p), params, step=1e-5)
    if mode != "analytic":
        raise ValueError(f"unknown gradient mode {mode!r}")
    v = expr.as_vector()
    a = (float(v[0]), float(v[1]))
    b = (float(v[2]), float(v[3]))
    c = ((float(v[4]), float(v[5])), (float(v[6]), float(v[7])))
    t2 = 2.0 * params.theta
    c2t, s2t = math.cos(t2), math.sin(t2)
    ang_a = (params.a0, params.a1)
    ang_b = (params.b0, params.b1)
    ca = tuple(math.cos(x) for x in ang_a)
    sa = tuple(math.sin(x) for x in ang_a)
    cb = tuple(math.cos(x) for x in ang_b)
    sb = tuple(math.sin(x) for x in ang_b)

    d_theta = -2.0 * s2t * (sum(a[x] * ca[x] for x in range(2))
                            + sum(b[y] * cb[y] for y in range(2)))
    d_theta += 2.0 * c2t * sum(
        c[x][y] * sa[x] * sb[y] for x in range(2) for y in range(2)
    )
    grad = [d_theta]
    for x in range(2):
        d = -a[x] * c2t * sa[x]
        d += sum(c[x][y] * (-sa[x] * cb[y] + s2t * ca[x] * sb[y]) for y in range(2))
        grad.append(d)
    for y in range(2):
        d = -b[y] * c2t * sb[y]
        d += sum(c[x][y] * (-ca[x] * sb[y] + s2t * sa[x] * cb[y]) for x in range(2))
        grad.append(d)
    return np.array(grad)


def _fd_gradient(
    f: Callable[[QubitParams], float], params: QubitParams, *, step: float
) -> np.ndarray:
    base = params.as_array()
    out = np.zeros(5)
    for i in range(5):
        up, dn = base.copy(), base.copy()
        up[i] += step
        dn[i] -= step
        out[i] = (f(QubitParams.from_array(up)) - f(QubitParams.from_array(dn))) / (
            2.0 * step
        )
    return out


def hessian_qubit_fd(
    expr: BellExpression, params: QubitParams, *, step: float = 1e-4
) -> np.ndarray:
    """Symmetrized central-difference Hessian of the qubit value function."""
    base = params.as_array()

    def f(vec: np.ndarray) -> float:
        return qubit_value(expr, QubitParams.from_array(vec))

    h = np.zeros((5, 5))
    f0 = f(base)
    for i in range(5):
        up, dn = base.copy(), base.copy()
        up[i] += step
        dn[i] -= step
        h[i, i] = (f(up) - 2.0 * f0 + f(dn)) / step**2
    for i in range(5):
        for j in range(i + 1, 5):
            pp, pm, mp, mm = (base.copy() for _ in range(4))
            pp[[i, j]] += step
            mm[[i, j]] -= step
            pm[i] += step
            pm[j] -= step
            mp[i] -= step
            mp[j] += step
            h[i, j] = h[j, i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step**2)
    return 0.5 * (h + h.T)


# ---------------------------------------------------------------------------
# The discrete symmetry exchanging the parties with signs.
# ---------------------------------------------------------------------------

SYMMETRY_SUBSTITUTION = {
    "A0": (-1, "B1"),
    "A1": (-1, "B0"),
    "B0": (-1, "A0"),
    "B1": (1, "A1"),
}


def _symmetry_matrix() -> np.ndarray:
    """Signed 8x8 permutation induced on coefficient vectors."""
    cols = []
    for i in range(8):
        entries: list[Entry] = [ZERO] * 8
        entries[i] = ONE
        basis_expr = _expression_from_entries(entries)
        image = symmetry_expr(basis_expr)
        cols.append(image.as_vector())
    return np.array(cols).T


def symmetry_expr(expr: BellExpression) -> BellExpression:
    """Apply the letter substitution to the formal polynomial."""
    if expr.kind == "exact":
        poly = expr.to_polynomial().substitute(SYMMETRY_SUBSTITUTION)
        return expression_from_polynomial(poly)
    mat = symmetry_matrix()
    return expression_from_vector(mat @ expr.as_vector())


def symmetry_behavior(beh: Behavior) -> Behavior:
    """Signed permutation on behaviors making the pairing invariant."""
    mat = symmetry_matrix()
    if beh.kind == "exact":
        entries = list(beh.entries())
        out: list[Entry] = []
        for r in range(8):
            acc = ZERO
            for c in range(8):
                coef = int(round(mat[r, c]))
                if coef:
                    acc = acc + entries[c] * Q2Scalar(coef)
            out.append(acc)
        return _behavior_from_entries(out)
    return behavior_from_vector(mat @ beh.as_vector())


_SYM_MATRIX_CACHE: np.ndarray | None = None


def symmetry_matrix() -> np.ndarray:
    global _SYM_MATRIX_CACHE
    if _SYM_MATRIX_CACHE is None:
        _SYM_MATRIX_CACHE = _symmetry_matrix()
    return _SYM_MATRIX_CACHE


def symmetry_orbit_expr(expr: BellExpression) -> list[BellExpression]:
    """The orbit expr, S expr, ..., S^7 expr."""
    out = [expr]
    for _ in range(7):
        out.append(symmetry_expr(out[-1]))
    return out


# ---------------------------------------------------------------------------
# JSON serialization (bit-exact for the exact kind).
# ---------------------------------------------------------------------------

def _entry_to_json(e: Entry):
    return format_scalar(e) if isinstance(e, Q2Scalar) else float(e)


def _entry_from_json(v, kind: str) -> Entry:
    if kind == "exact":
        if not isinstance(v, str):
            raise ValueError("exact kind requires exact-scalar strings")
        return parse_scalar(v)
    return float(parse_scalar(v)) if isinstance(v, str) else float(v)


def behavior_to_json(beh: Behavior) -> dict:
    return {
        "kind": beh.kind,
        "mA": [_entry_to_json(e) for e in beh.mA],
        "mB": [_entry_to_json(e) for e in beh.mB],
        "K": [[_entry_to_json(e) for e in row] for row in beh.K],
    }


def behavior_from_json(obj: dict) -> Behavior:
    kind = obj["kind"]
    if kind not in ("exact", "float"):
        raise ValueError(f"unknown behavior kind {kind!r}")
    mA = tuple(_entry_from_json(v, kind) for v in obj["mA"])
    mB = tuple(_entry_from_json(v, kind) for v in obj["mB"])
    K = tuple(tuple(_entry_from_json(v, kind) for v in row) for row in obj["K"])
    return Behavior(mA, mB, K)  # type: ignore[arg-type]


def expression_to_json(expr: BellExpression) -> dict:
    return {
        "kind": expr.kind,
        "a": [_entry_to_json(e) for e in expr.a],
        "b": [_entry_to_json(e) for e in expr.b],
        "c": [[_entry_to_json(e) for e in row] for row in expr.c],
    }


def expression_from_json(obj: dict) -> BellExpression:
    kind = obj["kind"]
    if kind not in ("exact", "float"):
        raise ValueError(f"unknown expression kind {kind!r}")
    a = tuple(_entry_from_json(v, kind) for v in obj["a"])
    b = tuple(_entry_from_json(v, kind) for v in obj["b"])
    c = tuple(tuple(_entry_from_json(v, kind) for v in row) for row in obj["c"])
    return BellExpression(a, b, c)  # type: ignore[arg-type]


def load_expression(path: str) -> BellExpression:
    with open(path) as fh:
        return expression_from_json(json.load(fh))


def load_behavior(path: str) -> Behavior:
    with open(path) as fh:
        return behavior_from_json(json.load(fh))
