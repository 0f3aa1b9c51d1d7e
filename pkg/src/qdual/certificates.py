"""Relaxation levels, nullifier spaces and exact SOS certificates.

An operator polynomial is a nullifier when its canonical two-qubit
implementation annihilates the maximally entangled state.  A sum-of-squares
certificate for a Bell expression beta with quantum bound 1 is a PSD Gram
matrix W over a basis of nullifiers N with 1 - beta = N^dagger W N; the
identity and the positivity are both checked exactly over Q(sqrt2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (
    INV_SQRT2,
    ONE,
    UNIT,
    Monomial,
    Polynomial,
    Q2Scalar,
    SQRT2,
    ZERO,
    format_polynomial,
    format_scalar,
    parse_polynomial,
    parse_scalar,
)
from .linalg import ExactMatrix, PsdResult, psd_check_exact
from .scenario import (
    BellExpression,
    QubitParams,
    expression_from_json,
    expression_to_json,
)

LEVEL_TAGS = ("L1", "L1AB", "L1AB_ABB", "L1AB_ABB_AAB")


@dataclass(frozen=True)
class RelaxationLevel:
    """Ordered monomial list of one truncation of the operator algebra."""

    tag: str
    monomials: tuple[Monomial, ...]

    @property
    def size(self) -> int:
        return len(self.monomials)


def monomials_of_level(tag: str) -> RelaxationLevel:
    """Monomial sets of sizes 5 / 9 / 13 / 17 for the four levels."""
    if tag not in LEVEL_TAGS:
        raise ValueError(f"unknown relaxation level {tag!r}")
    a = (Monomial.letter("A0"), Monomial.letter("A1"))
    b = (Monomial.letter("B0"), Monomial.letter("B1"))
    monos: list[Monomial] = [UNIT, a[0], a[1], b[0], b[1]]
    if tag != "L1":
        monos += [a[x] * b[y] for x in range(2) for y in range(2)]
    if tag in ("L1AB_ABB", "L1AB_ABB_AAB"):
        monos += [
            a[x] * b[y] * b[1 - y] for x in range(2) for y in range(2)
        ]
    if tag == "L1AB_ABB_AAB":
        monos += [
            a[x] * a[1 - x] * b[y] for x in range(2) for y in range(2)
        ]
    return RelaxationLevel(tag, tuple(monos))


# ---------------------------------------------------------------------------
# Canonical two-qubit implementation.
# ---------------------------------------------------------------------------

def _exact_letter_matrices() -> dict[str, ExactMatrix]:
    h = INV_SQRT2
    z = [[ONE, ZERO], [ZERO, -ONE]]
    x = [[ZERO, ONE], [ONE, ZERO]]
    a0 = [[h, h], [h, -h]]
    a1 = [[h, -h], [-h, -h]]
    return {
        "A0": ExactMatrix(a0),
        "A1": ExactMatrix(a1),
        "B0": ExactMatrix(z),
        "B1": ExactMatrix(x),
    }


_LETTERS_EXACT = _exact_letter_matrices()

# |phi+> = (|00> + |11>)/sqrt2 in the computational basis.
_PHI_PLUS = (INV_SQRT2, ZERO, ZERO, INV_SQRT2)


def _apply_letter_exact(
    name: str, vec: tuple[Q2Scalar, Q2Scalar, Q2Scalar, Q2Scalar]
) -> tuple[Q2Scalar, ...]:
    m = _LETTERS_EXACT[name]
    on_first = name[0] == "A"
    out = [ZERO] * 4
    for i in range(2):
        for j in range(2):
            src = 2 * i + j
            if vec[src].is_zero():
                continue
            for t in range(2):
                if on_first:
                    dst = 2 * t + j
                    out[dst] = out[dst] + m[t, i] * vec[src]
                else:
                    dst = 2 * i + t
                    out[dst] = out[dst] + m[t, j] * vec[src]
    return tuple(out)


def state_action_exact(poly: Polynomial) -> tuple[Q2Scalar, ...]:
    """The 4-vector of the implemented polynomial applied to the maximally
    entangled state, exactly."""
    out = [ZERO] * 4
    for mono, coeff in poly.terms().items():
        vec = _PHI_PLUS
        letters = [f"A{i}" for i in mono.a] + [f"B{j}" for j in mono.b]
        for name in reversed(letters):
            vec = _apply_letter_exact(name, vec)  # type: ignore[assignment]
        for i in range(4):
            out[i] = out[i] + coeff * vec[i]
    return tuple(out)


def state_action_float(poly: Polynomial, params: QubitParams) -> np.ndarray:
    """Action of the polynomial on the parametrized two-qubit realization."""
    ct, st = np.cos(params.theta), np.sin(params.theta)
    state = np.array([ct, 0.0, 0.0, st])
    eye = np.eye(2)

    def obs(angle: float) -> np.ndarray:
        z = np.array([[1.0, 0.0], [0.0, -1.0]])
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        return np.cos(angle) * z + np.sin(angle) * x

    mats = {
        "A0": np.kron(obs(params.a0), eye),
        "A1": np.kron(obs(params.a1), eye),
        "B0": np.kron(eye, obs(params.b0)),
        "B1": np.kron(eye, obs(params.b1)),
    }
    out = np.zeros(4)
    for mono, coeff in poly.terms().items():
        vec = state
        letters = [f"A{i}" for i in mono.a] + [f"B{j}" for j in mono.b]
        for name in reversed(letters):
            vec = mats[name] @ vec
        out += float(coeff) * vec
    return out


# ---------------------------------------------------------------------------
# Nullifier spaces.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullifierBasis:
    level: RelaxationLevel
    polys: tuple[Polynomial, ...]
    action_matrix: ExactMatrix  # rows: monomials, columns: state components

    @property
    def dimension(self) -> int:
        return len(self.polys)


def nullifier_basis(level: RelaxationLevel) -> NullifierBasis:
    """Exact basis of the nullifiers spanned by the level's monomials.

    The basis is the kernel of the monomial-action map, canonicalized by
    reduced echelon form over the fixed monomial order.
    """
    action_rows = [
        list(state_action_exact(Polynomial.monomial(m))) for m in level.monomials
    ]
    action = ExactMatrix(action_rows)
    kernel = action.transpose().kernel()
    polys = []
    for vec in kernel:
        poly = Polynomial.zero()
        for coeff, mono in zip(vec, level.monomials):
            if not coeff.is_zero():
                poly = poly + Polynomial.monomial(mono, coeff)
        polys.append(poly)
    return NullifierBasis(level, tuple(polys), action)


def generating_sequence() -> list[Polynomial]:
    """The nine-element generating sequence of the degree-3 nullifier space
    used by the hand-built certificate."""
    a0, a1 = Polynomial.letter("A0"), Polynomial.letter("A1")
    b0, b1 = Polynomial.letter("B0"), Polynomial.letter("B1")
    one = Polynomial.one()
    s = (a0 + a1) * INV_SQRT2
    d = (a0 - a1) * INV_SQRT2
    return [
        s - b0,
        d - b1,
        one - s * b0,
        one - d * b1,
        s * b1 + d * b0,
        b1 * (one - s * b0),
        b0 * (one - d * b1),
        (one + s * b0) * b1,
        (one + d * b1) * b0,
    ]


# ---------------------------------------------------------------------------
# SOS certificates.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SOSCertificate:
    """Gram matrix over a labeled nullifier basis for a target expression."""

    basis: tuple[Polynomial, ...]
    gram: ExactMatrix | np.ndarray
    target: BellExpression

    @property
    def is_exact(self) -> bool:
        return isinstance(self.gram, ExactMatrix)


def gram_expand(
    polys: Sequence[Polynomial], gram: ExactMatrix | np.ndarray
) -> Polynomial:
    """sum_{k,l} W[k,l] N_k^dagger N_l in normal form.

    Float Gram matrices are lifted to exact rationals entry-wise, so the
    result is always an exact polynomial (approximating the float input to
    double precision).
    """
    n = len(polys)
    if isinstance(gram, ExactMatrix):
        if gram.rows != n or gram.cols != n:
            raise ValueError("Gram dimension mismatch")
        get = lambda k, l: gram[k, l]  # noqa: E731
    else:
        arr = np.asarray(gram, dtype=float)
        if arr.shape != (n, n):
            raise ValueError("Gram dimension mismatch")
        get = lambda k, l: Q2Scalar(Fraction(float(arr[k, l])))  # noqa: E731
    adjoints = [p.adjoint() for p in polys]
    out = Polynomial.zero()
    for k in range(n):
        for l in range(n):
            w = get(k, l)
            if isinstance(w, Q2Scalar) and w.is_zero():
                continue
            out = out + (adjoints[k] * polys[l]).scale(w)
    return out


def w3_certificate() -> SOSCertificate:
    """The published exact 6x6 certificate for the extremal expression.

    Expressed over the generating-sequence elements in the order
    (N0, N2, N6, N1, N5, N4), with the shorthand s = 2 - sqrt(2) and an
    overall prefactor 1/16; blanks of the printed triangle are zeros.
    """
    from .family import tsirelson_expression

    seq = generating_sequence()
    basis = tuple(seq[i] for i in (0, 2, 6, 1, 5, 4))
    s = Q2Scalar(2) - SQRT2
    two = Q2Scalar(2)
    upper = {
        (0, 0): SQRT2, (0, 1): -two * s, (0, 2): -s,
        (1, 1): two * s, (1, 2): ZERO,
        (2, 2): SQRT2,
        (3, 3): two, (3, 4): ZERO, (3, 5): s,
        (4, 4): SQRT2 * s, (4, 5): s,
        (5, 5): s,
    }
    sixteenth = Q2Scalar(Fraction(1, 16))
    rows = [[ZERO] * 6 for _ in range(6)]
    for (i, j), val in upper.items():
        rows[i][j] = val * sixteenth
        rows[j][i] = val * sixteenth
    return SOSCertificate(basis, ExactMatrix(rows), tsirelson_expression())


W3_EIGENVALUES_CLOSED_FORM = (
    "(1 - sqrt(10 - 7 sqrt2))/8",
    "(1 + sqrt(10 - 7 sqrt2))/8",
    "(2 - sqrt2)/8",
    "(3 sqrt2 / 2 - 1)/8",
)


def w3_eigenvalues_float() -> np.ndarray:
    """The four nonzero eigenvalues of the exact certificate, ascending."""
    root = np.sqrt(10.0 - 7.0 * np.sqrt(2.0))
    vals = np.array(
        [
            (1.0 - root) / 8.0,
            (1.0 + root) / 8.0,
            (2.0 - np.sqrt(2.0)) / 8.0,
            (3.0 * np.sqrt(2.0) / 2.0 - 1.0) / 8.0,
        ]
    )
    return np.sort(vals)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    identity_exact: bool
    residual: Polynomial | None  # gram expansion minus (1 - beta), if nonzero
    psd: PsdResult
    rank: int
    max_residual_coeff: float

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        pieces = [
            "identity exact" if self.identity_exact
            else f"identity residual {self.max_residual_coeff:.3e}",
            "PSD" if self.psd.is_psd else "NOT PSD",
            f"rank {self.rank}",
        ]
        return f"{status}: " + "; ".join(pieces)


def verify_certificate(
    expr: BellExpression,
    cert: SOSCertificate,
    *,
    float_tol: float = 1e-8,
) -> VerificationReport:
    """Check 1 - beta = N^dagger W N and W >= 0.

    Exact certificates get exact verdicts; float Gram matrices are accepted
    when every residual coefficient is within ``float_tol`` and the matrix
    is PSD within the same tolerance.
    """
    if cert.is_exact and expr.kind == "exact":
        expansion = gram_expand(cert.basis, cert.gram)
        target = Polynomial.one() - expr.to_polynomial()
        residual = expansion - target
        identity = residual.is_zero()
        psd = psd_check_exact(cert.gram)  # type: ignore[arg-type]
        exact_rank = cert.gram.rank()  # type: ignore[union-attr]
        passed = identity and psd.is_psd
        return VerificationReport(
            passed=passed,
            identity_exact=identity,
            residual=None if identity else residual,
            psd=psd,
            rank=exact_rank,
            max_residual_coeff=0.0 if identity else max(
                abs(float(c)) for c in residual.terms().values()
            ),
        )

    # Float route: lift to exact, allow tolerances.
    gram = cert.gram
    arr = gram.to_float() if isinstance(gram, ExactMatrix) else np.asarray(gram)
    arr = 0.5 * (arr + arr.T)
    expansion = gram_expand(cert.basis, arr)
    expr_exact_poly = (
        expr.to_polynomial() if expr.kind == "exact" else None
    )
    if expr_exact_poly is not None:
        target = Polynomial.one() - expr_exact_poly
        residual = expansion - target
        max_coeff = max(
            (abs(float(c)) for c in residual.terms().values()), default=0.0
        )
    else:
        vec = expr.as_vector()
        from .scenario import _MONO_A, _MONO_B

        monos = [
            _MONO_A[0], _MONO_A[1], _MONO_B[0], _MONO_B[1],
            _MONO_A[0] * _MONO_B[0], _MONO_A[0] * _MONO_B[1],
            _MONO_A[1] * _MONO_B[0], _MONO_A[1] * _MONO_B[1],
        ]
        target_terms = {UNIT: ONE}
        for mono, coeff in zip(monos, vec):
            target_terms[mono] = Q2Scalar(Fraction(-float(coeff)))
        residual = expansion - Polynomial(target_terms)
        max_coeff = max(
            (abs(float(c)) for c in residual.terms().values()), default=0.0
        )
    identity = max_coeff <= float_tol
    eigvals = np.linalg.eigvalsh(arr)
    psd_ok = bool(eigvals[0] >= -float_tol)
    rank = int(np.sum(eigvals > float_tol))
    psd = PsdResult(psd_ok, (), None)
    return VerificationReport(
        passed=identity and psd_ok,
        identity_exact=False,
        residual=residual if not identity else None,
        psd=psd,
        rank=rank,
        max_residual_coeff=max_coeff,
    )


# ---------------------------------------------------------------------------
# Certificate JSON.
# ---------------------------------------------------------------------------

def certificate_to_json(cert: SOSCertificate) -> dict:
    if cert.is_exact:
        gram = [
            [format_scalar(cert.gram[i, j]) for j in range(cert.gram.cols)]  # type: ignore[union-attr]
            for i in range(cert.gram.rows)  # type: ignore[union-attr]
        ]
    else:
        gram = [[float(x) for x in row] for row in np.asarray(cert.gram)]
    return {
        "basis": [format_polynomial(p) for p in cert.basis],
        "W": gram,
        "target": expression_to_json(cert.target),
    }


def certificate_from_json(obj: dict) -> SOSCertificate:
    basis = tuple(parse_polynomial(s) for s in obj["basis"])
    raw = obj["W"]
    if raw and isinstance(raw[0][0], str):
        gram: ExactMatrix | np.ndarray = ExactMatrix(
            [[parse_scalar(s) for s in row] for row in raw]
        )
    else:
        gram = np.array(raw, dtype=float)
    return SOSCertificate(basis, gram, expression_from_json(obj["target"]))


def load_certificate(path: str) -> SOSCertificate:
    with open(path) as fh:
        return certificate_from_json(json.load(fh))
