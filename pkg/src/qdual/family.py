"""The two-parameter family of Bell expressions maximized by the Tsirelson point.

Contains the extended four-parameter parametrization and its reduction by
first-order stationarity, the exact regular octagon of expressions with
local bound 1, the decomposition of CHSH into two extremal expressions,
and the exposure checks for the extremal expression of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .algebra import INV_SQRT2, ONE, Polynomial, Q2Scalar, SQRT2, ZERO
from .linalg import ExactMatrix
from .scenario import (
    Behavior,
    BellExpression,
    Entry,
    LocalVertexIndex,
    all_local_vertices,
    chsh_expression,
    expression_from_polynomial,
    local_bound,
    local_vertex,
    pair,
    symmetry_expr,
    tsirelson_point,
)

ScalarLike = Union[Q2Scalar, int, Fraction, float]

HALF = Q2Scalar(Fraction(1, 2))

# r0 coordinate of the extremal expression: 1 - 1/sqrt(2).
EXTREMAL_RADIUS = ONE - INV_SQRT2


def _as_entry(x: ScalarLike) -> Entry:
    if isinstance(x, (Q2Scalar, float)):
        return x
    return Q2Scalar(x)


def _marginal_gap_polys() -> tuple[Polynomial, Polynomial]:
    """(A0+A1)/sqrt2 - B0 and (A0-A1)/sqrt2 - B1 as formal polynomials."""
    a0, a1 = Polynomial.letter("A0"), Polynomial.letter("A1")
    b0, b1 = Polynomial.letter("B0"), Polynomial.letter("B1")
    return (
        (a0 + a1) * INV_SQRT2 - b0,
        (a0 - a1) * INV_SQRT2 - b1,
    )


def _cross_polys() -> tuple[Polynomial, Polynomial, Polynomial]:
    """The three degree-2 building blocks of the extended parametrization."""
    a0, a1 = Polynomial.letter("A0"), Polynomial.letter("A1")
    b0, b1 = Polynomial.letter("B0"), Polynomial.letter("B1")
    sum_ab0 = (a0 + a1) * INV_SQRT2 * b0
    diff_ab1 = (a0 - a1) * INV_SQRT2 * b1
    mixed = (a0 + a1) * INV_SQRT2 * b1 + (a0 - a1) * INV_SQRT2 * b0
    return sum_ab0, diff_ab1, mixed


def expr_from_extended(
    r0: ScalarLike, r1: ScalarLike, r2: ScalarLike, lam: ScalarLike
) -> BellExpression:
    """Four-parameter family built to make the maximally entangled state a
    unit eigenstate of the Bell operator (exact when inputs are exact)."""
    entries = (r0, r1, r2, lam)
    if any(isinstance(x, float) for x in entries):
        r0f, r1f, r2f, lamf = (float(_to_float(x)) for x in entries)
        base = [
            expr_from_extended(1, 0, 0, 0).as_vector(),
            expr_from_extended(0, 1, 0, 0).as_vector(),
            expr_from_extended(0, 0, 1, 0).as_vector(),
            expr_from_extended(0, 0, 0, 1).as_vector(),
        ]
        const = expr_from_extended(0, 0, 0, 0).as_vector()
        vec = const + r0f * (base[0] - const) + r1f * (base[1] - const) \
            + r2f * (base[2] - const) + lamf * (base[3] - const)
        from .scenario import expression_from_vector

        return expression_from_vector(vec)
    g0, g1 = _marginal_gap_polys()
    sum_ab0, diff_ab1, mixed = _cross_polys()
    r0s, r1s, r2s, lams = (_as_entry(x) for x in entries)
    poly = (
        g0 * r0s
        + g1 * r1s
        + mixed * r2s
        + sum_ab0 * lams
        + diff_ab1 * (ONE - lams)
    )
    return expression_from_polynomial(poly)


def _to_float(x: ScalarLike) -> float:
    return float(x)


def expr_from_slice(r0: ScalarLike, r1: ScalarLike) -> BellExpression:
    """beta_{r0,r1}: the reduced family r2 = 0, lambda = 1/2."""
    if isinstance(r0, float) or isinstance(r1, float):
        return expr_from_extended(float(r0), float(r1), 0.0, 0.5)
    return expr_from_extended(r0, r1, 0, Fraction(1, 2))


def tsirelson_expression() -> BellExpression:
    """The extremal expression at slice coordinates (1 - 1/sqrt2, 0)."""
    return expr_from_slice(EXTREMAL_RADIUS, ZERO)


def slice_coords_of(
    expr: BellExpression, *, tol: float = 1e-10
) -> tuple[Entry, Entry] | None:
    """Inverse of expr_from_slice, or None if the expression is off the slice."""
    if expr.kind == "exact":
        r0, r1 = -expr.b[0], -expr.b[1]
        candidate = expr_from_slice(r0, r1)
        if candidate.entries() == expr.entries():
            return r0, r1
        return None
    r0, r1 = -float(expr.b[0]), -float(expr.b[1])
    candidate = expr_from_slice(r0, r1)
    if float(np.max(np.abs(candidate.as_vector() - expr.as_vector()))) <= tol:
        return r0, r1
    return None


# ---------------------------------------------------------------------------
# Bell operator in the Pauli basis for the canonical measurements.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliCoeffs:
    """Coefficients of (Z_A, X_A, Z_B, X_B, Z_AZ_B, X_AX_B, Z_AX_B, X_AZ_B)."""

    p: tuple[Entry, ...]

    def __post_init__(self) -> None:
        if len(self.p) != 8:
            raise ValueError("expected 8 coefficients")

    def as_vector(self) -> np.ndarray:
        return np.array([float(x) for x in self.p])


def pauli_coeffs(expr: BellExpression) -> PauliCoeffs:
    """Bell-operator coefficients for the canonical Tsirelson measurements.

    Exact on exact input: the map only divides by sqrt(2).
    """
    a, b, c = expr.a, expr.b, expr.c
    if expr.kind == "exact":
        h = INV_SQRT2
        p = (
            (a[0] + a[1]) * h,
            (a[0] - a[1]) * h,
            b[0],
            b[1],
            (c[0][0] + c[1][0]) * h,
            (c[0][1] - c[1][1]) * h,
            (c[0][1] + c[1][1]) * h,
            (c[0][0] - c[1][0]) * h,
        )
        return PauliCoeffs(p)
    h = 1.0 / np.sqrt(2.0)
    af = [float(x) for x in a]
    bf = [float(x) for x in b]
    cf = [[float(x) for x in row] for row in c]
    p = (
        (af[0] + af[1]) * h,
        (af[0] - af[1]) * h,
        bf[0],
        bf[1],
        (cf[0][0] + cf[1][0]) * h,
        (cf[0][1] - cf[1][1]) * h,
        (cf[0][1] + cf[1][1]) * h,
        (cf[0][0] - cf[1][0]) * h,
    )
    return PauliCoeffs(p)


def eigenstate_residuals(coeffs: PauliCoeffs) -> tuple[Entry, ...]:
    """Residuals of the four unit-eigenstate conditions; all zero iff the
    maximally entangled state is a unit eigenvector of the Bell operator."""
    p = coeffs.p

    def add(x: Entry, y: Entry) -> Entry:
        if isinstance(x, Q2Scalar) and isinstance(y, Q2Scalar):
            return x + y
        return float(x) + float(y)

    def sub(x: Entry, y: Entry) -> Entry:
        if isinstance(x, Q2Scalar) and isinstance(y, Q2Scalar):
            return x - y
        return float(x) - float(y)

    one: Entry = ONE if isinstance(p[4], Q2Scalar) and isinstance(p[5], Q2Scalar) else 1.0
    return (
        add(p[0], p[2]),
        add(p[1], p[3]),
        sub(add(p[4], p[5]), one),
        sub(p[6], p[7]),
    )


_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_I2 = np.eye(2)


def bell_operator_matrix(coeffs: PauliCoeffs) -> np.ndarray:
    """4x4 Bell operator in the computational basis |00>,|01>,|10>,|11>."""
    p = coeffs.as_vector()
    terms = [
        np.kron(_Z, _I2),
        np.kron(_X, _I2),
        np.kron(_I2, _Z),
        np.kron(_I2, _X),
        np.kron(_Z, _Z),
        np.kron(_X, _X),
        np.kron(_Z, _X),
        np.kron(_X, _Z),
    ]
    out = np.zeros((4, 4))
    for coeff, term in zip(p, terms):
        out += coeff * term
    return out


# ---------------------------------------------------------------------------
# Exact first-order stationarity at the Tsirelson realization.
# ---------------------------------------------------------------------------

def _octant_cos(k: int) -> Q2Scalar:
    """cos(k * pi/4), exact."""
    table = {0: ONE, 1: INV_SQRT2, 2: ZERO, 3: -INV_SQRT2,
             4: -ONE, 5: -INV_SQRT2, 6: ZERO, 7: INV_SQRT2}
    return table[k % 8]


def _octant_sin(k: int) -> Q2Scalar:
    return _octant_cos(k - 2)


def _exact_qubit_gradient(expr: BellExpression, octants: tuple[int, ...]) -> list[Q2Scalar]:
    """Gradient of the qubit value function, exactly, at a parameter point
    whose five angles are the given multiples of pi/4 (theta, a0, a1, b0, b1)."""
    a, b, c = expr.a, expr.b, expr.c
    kt, ka0, ka1, kb0, kb1 = octants
    c2t, s2t = _octant_cos(2 * kt), _octant_sin(2 * kt)
    ca = (_octant_cos(ka0), _octant_cos(ka1))
    sa = (_octant_sin(ka0), _octant_sin(ka1))
    cb = (_octant_cos(kb0), _octant_cos(kb1))
    sb = (_octant_sin(kb0), _octant_sin(kb1))
    two = Q2Scalar(2)

    d_theta = ZERO
    for x in range(2):
        d_theta = d_theta - two * s2t * a[x] * ca[x]
    for y in range(2):
        d_theta = d_theta - two * s2t * b[y] * cb[y]
    for x in range(2):
        for y in range(2):
            d_theta = d_theta + two * c2t * c[x][y] * sa[x] * sb[y]
    grad = [d_theta]
    for x in range(2):
        d = -a[x] * c2t * sa[x]
        for y in range(2):
            d = d + c[x][y] * (-sa[x] * cb[y] + s2t * ca[x] * sb[y])
        grad.append(d)
    for y in range(2):
        d = -b[y] * c2t * sb[y]
        for x in range(2):
            d = d + c[x][y] * (-ca[x] * sb[y] + s2t * sa[x] * cb[y])
        grad.append(d)
    return grad


TSIRELSON_OCTANTS = (1, 1, -1, 0, 2)  # (theta, a0, a1, b0, b1) in units of pi/4


@dataclass(frozen=True)
class StationarityReport:
    lam: Q2Scalar
    r2: Q2Scalar
    system_rank: int


def stationarity_reduce() -> StationarityReport:
    """Solve the five first-order stationarity equations of the extended
    family at the Tsirelson realization, exactly.

    The gradient is affine in (r0, r1, r2, lambda); the equations leave
    r0, r1 free and pin (lambda, r2) = (1/2, 0).
    """
    def grad_at(r0, r1, r2, lam) -> list[Q2Scalar]:
        return _exact_qubit_gradient(
            expr_from_extended(r0, r1, r2, lam), TSIRELSON_OCTANTS
        )

    const = grad_at(0, 0, 0, 0)
    columns = []
    for unit in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
        g = grad_at(*unit)
        columns.append([g[i] - const[i] for i in range(5)])
    # r0 and r1 never enter the stationarity system: the reduced family is
    # stationary for every choice of those two parameters.
    for j in (0, 1):
        assert all(c.is_zero() for c in columns[j]), "unexpected r0/r1 dependence"
    system = ExactMatrix(
        [[columns[2][i], columns[3][i]] for i in range(5)]
    )
    rhs = [-const[i] for i in range(5)]
    solution = system.solve(rhs)
    assert solution is not None, "stationarity system inconsistent"
    rank = system.rank()
    assert rank == 2, "stationarity system should pin both parameters"
    r2, lam = solution
    return StationarityReport(lam=lam, r2=r2, system_rank=rank)


# ---------------------------------------------------------------------------
# The exact octagon of expressions with local bound 1.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlane:
    """Constraint u*r0 + v*r1 <= rhs with exact coefficients."""

    u: Q2Scalar
    v: Q2Scalar
    rhs: Q2Scalar
    vertices: tuple[LocalVertexIndex, ...]  # local vertices inducing it

    def margin(self, r0: Q2Scalar, r1: Q2Scalar) -> Q2Scalar:
        return self.rhs - (self.u * r0 + self.v * r1)


def _slice_constraints() -> list[HalfPlane]:
    """The 16 local-vertex constraints on (r0, r1), deduplicated."""
    d0 = expr_from_slice(ONE, ZERO) - expr_from_slice(ZERO, ZERO)
    d1 = expr_from_slice(ZERO, ONE) - expr_from_slice(ZERO, ZERO)
    center = expr_from_slice(ZERO, ZERO)
    raw: dict[tuple[Q2Scalar, Q2Scalar, Q2Scalar], list[LocalVertexIndex]] = {}
    for idx in all_local_vertices():
        vertex = local_vertex(idx)
        u = pair(d0, vertex)
        v = pair(d1, vertex)
        rhs = ONE - pair(center, vertex)
        # Canonical positive scaling so coincident half-planes collapse.
        lead = u if not u.is_zero() else v
        if lead.is_zero():
            # Constant constraint; must be satisfiable (0 <= rhs).
            assert rhs.sign() >= 0, "infeasible constant constraint"
            continue
        scale = lead.abs().inverse()
        key = (u * scale, v * scale, rhs * scale)
        raw.setdefault(key, []).append(idx)
    return [
        HalfPlane(u, v, rhs, tuple(indices))
        for (u, v, rhs), indices in raw.items()
    ]


def octagon_vertices() -> list[tuple[Q2Scalar, Q2Scalar]]:
    """Exact vertices of the local-bound-1 region, sorted by angle from 0.

    Computed as the pairwise intersections of the deduplicated half-planes
    that satisfy every constraint.
    """
    planes = _slice_constraints()
    points: list[tuple[Q2Scalar, Q2Scalar]] = []
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            p, q = planes[i], planes[j]
            det = p.u * q.v - p.v * q.u
            if det.is_zero():
                continue
            inv = det.inverse()
            r0 = (p.rhs * q.v - p.v * q.rhs) * inv
            r1 = (p.u * q.rhs - p.rhs * q.u) * inv
            if all(h.margin(r0, r1).sign() >= 0 for h in planes):
                if (r0, r1) not in points:
                    points.append((r0, r1))
    points.sort(key=lambda pt: math.atan2(float(pt[1]), float(pt[0])) % (2 * math.pi))
    return points


def in_octagon(r0: ScalarLike, r1: ScalarLike, *, tol: float = 1e-9) -> str:
    """Classify a slice point: "interior", "boundary" or "outside"."""
    planes = _slice_constraints()
    if isinstance(r0, float) or isinstance(r1, float):
        margins = [
            float(h.rhs) - (float(h.u) * float(r0) + float(h.v) * float(r1))
            for h in planes
        ]
        low = min(margins)
        if low < -tol:
            return "outside"
        if low <= tol:
            return "boundary"
        return "interior"
    r0s, r1s = _as_entry(r0), _as_entry(r1)
    signs = [h.margin(r0s, r1s).sign() for h in planes]
    if any(s < 0 for s in signs):
        return "outside"
    if any(s == 0 for s in signs):
        return "boundary"
    return "interior"


# ---------------------------------------------------------------------------
# CHSH decomposition and exposure checks.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionReport:
    passed: bool
    midpoint_coords: tuple[Q2Scalar, Q2Scalar]
    opposite_coords: tuple[Q2Scalar, Q2Scalar]
    normalization_factor: Q2Scalar  # scale between raw CHSH and the midpoint

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{status}: (beta_T + S^4 beta_T)/2 equals CHSH/(2*sqrt2); "
            f"midpoint coords ({self.midpoint_coords[0]},{self.midpoint_coords[1]}); "
            f"raw CHSH differs by the factor {self.normalization_factor}"
        )


def chsh_decompose_check() -> DecompositionReport:
    """Verify exactly that the normalized CHSH expression is the midpoint of
    the extremal expression and its antipode under the symmetry."""
    beta_t = tsirelson_expression()
    s4 = beta_t
    for _ in range(4):
        s4 = symmetry_expr(s4)
    midpoint = (beta_t + s4).scale(HALF)
    target = chsh_expression().scale(INV_SQRT2 * HALF)
    passed = midpoint.entries() == target.entries()
    opp = slice_coords_of(s4)
    assert opp is not None
    mid_coords = slice_coords_of(midpoint)
    assert mid_coords is not None
    passed = passed and opp == (-EXTREMAL_RADIUS, ZERO) and mid_coords == (ZERO, ZERO)
    return DecompositionReport(
        passed=passed,
        midpoint_coords=mid_coords,  # type: ignore[arg-type]
        opposite_coords=opp,  # type: ignore[arg-type]
        normalization_factor=Q2Scalar(0, 2),
    )


def exposing_point() -> Behavior:
    """Uniform mixture of the Tsirelson point and the two deterministic
    behaviors saturating the extremal expression; it exposes that expression."""
    third = Q2Scalar(Fraction(1, 3))
    parts = [
        tsirelson_point(),
        local_vertex(LocalVertexIndex(-1, -1, -1, 1)),
        local_vertex(LocalVertexIndex(-1, 1, 1, -1)),
    ]
    entries = [
        sum((p.entries()[i] for p in parts), ZERO) * third for i in range(8)
    ]
    from .scenario import _behavior_from_entries

    return _behavior_from_entries(entries)


@dataclass(frozen=True)
class ExposeReport:
    passed: bool
    pairing_value: Q2Scalar
    unique_solution: tuple[Q2Scalar, Q2Scalar]
    octagon_affine_dimension: int

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{status}: pairing with the exposing point = {self.pairing_value}; "
            f"unique saturating slice point "
            f"({self.unique_solution[0]},{self.unique_solution[1]}); "
            f"octagon affine dimension {self.octagon_affine_dimension}"
        )


def expose_check() -> ExposeReport:
    """Verify the exposure of the extremal expression and the dimension of
    the octagonal face, exactly."""
    beta_t = tsirelson_expression()
    star = exposing_point()
    value = pair(beta_t, star)

    # Saturating both deterministic points pins a unique slice point.
    d0 = expr_from_slice(ONE, ZERO) - expr_from_slice(ZERO, ZERO)
    d1 = expr_from_slice(ZERO, ONE) - expr_from_slice(ZERO, ZERO)
    center = expr_from_slice(ZERO, ZERO)
    rows = []
    rhs = []
    for idx in (LocalVertexIndex(-1, -1, -1, 1), LocalVertexIndex(-1, 1, 1, -1)):
        vtx = local_vertex(idx)
        rows.append([pair(d0, vtx), pair(d1, vtx)])
        rhs.append(ONE - pair(center, vtx))
    system = ExactMatrix(rows)
    solution = system.solve(rhs)
    unique = system.rank() == 2 and solution is not None
    expected = (EXTREMAL_RADIUS, ZERO)

    verts = octagon_vertices()
    diffs = ExactMatrix(
        [[v[0] - verts[0][0], v[1] - verts[0][1]] for v in verts[1:]]
    )
    affine_dim = diffs.rank()

    passed = (
        value == ONE
        and unique
        and solution == expected
        and affine_dim == 2
    )
    return ExposeReport(
        passed=passed,
        pairing_value=value,  # type: ignore[arg-type]
        unique_solution=solution if solution else (ZERO, ZERO),  # type: ignore[arg-type]
        octagon_affine_dimension=affine_dim,
    )
