"""Exact dense linear algebra over Q(sqrt2) and a numeric symmetric eigensolver.

The exact side (RREF, rank, kernel, LDL^T positivity check) backs the
certificate verification, where floating point is not acceptable.  The
numeric side is a cyclic Jacobi eigensolver for small symmetric matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import ONE, ZERO, Q2Scalar

Vector = tuple[Q2Scalar, ...]


class ExactMatrix:
    """Immutable rectangular matrix with Q(sqrt2) entries, row-major."""

    __slots__ = ("data", "rows", "cols")

    def __init__(self, rows: Sequence[Sequence[Q2Scalar]]) -> None:
        data = tuple(tuple(entry for entry in row) for row in rows)
        if data and any(len(r) != len(data[0]) for r in data):
            raise ValueError("ragged rows")
        self.data = data
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix(
            [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zeros(rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix([[ZERO] * cols for _ in range(rows)])

    def __getitem__(self, idx: tuple[int, int]) -> Q2Scalar:
        return self.data[idx[0]][idx[1]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.data == other.data

    def __hash__(self) -> int:
        return hash(self.data)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = ZERO
                for k in range(self.cols):
                    acc = acc + self.data[i][k] * other.data[k][j]
                row.append(acc)
            out.append(row)
        return ExactMatrix(out)

    def apply(self, vec: Sequence[Q2Scalar]) -> Vector:
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch")
        return tuple(
            sum((self.data[i][k] * vec[k] for k in range(self.cols)), ZERO)
            for i in range(self.rows)
        )

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self.data[i][j] == self.data[j][i]
            for i in range(self.rows)
            for j in range(i + 1, self.cols)
        )

    def to_float(self) -> np.ndarray:
        return np.array(
            [[float(e) for e in row] for row in self.data], dtype=float
        )

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols})"

    # -- elimination ------------------------------------------------------

    def rref(self) -> tuple["ExactMatrix", list[int]]:
        """Reduced row echelon form and pivot column indices."""
        m = [list(row) for row in self.data]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            pivot_row = next(
                (i for i in range(r, self.rows) if not m[i][c].is_zero()), None
            )
            if pivot_row is None:
                continue
            m[r], m[pivot_row] = m[pivot_row], m[r]
            inv = m[r][c].inverse()
            m[r] = [inv * e for e in m[r]]
            for i in range(self.rows):
                if i != r and not m[i][c].is_zero():
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return ExactMatrix(m), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel(self) -> list[Vector]:
        """Basis of the right null space, in reduced echelon order."""
        rref, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis: list[Vector] = []
        for fc in free:
            vec = [ZERO] * self.cols
            vec[fc] = ONE
            for r, pc in enumerate(pivots):
                vec[pc] = -rref.data[r][fc]
            basis.append(tuple(vec))
        return basis

    def solve(self, rhs: Sequence[Q2Scalar]) -> Vector | None:
        """One exact solution of self @ x = rhs, or None if inconsistent."""
        if len(rhs) != self.rows:
            raise ValueError("dimension mismatch")
        aug = ExactMatrix(
            [list(row) + [rhs[i]] for i, row in enumerate(self.data)]
        )
        rref, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = [ZERO] * self.cols
        for r, pc in enumerate(pivots):
            x[pc] = rref.data[r][self.cols]
        return tuple(x)


@dataclass(frozen=True)
class PsdResult:
    """Outcome of the exact LDL^T positivity check."""

    is_psd: bool
    pivots: tuple[Q2Scalar, ...]  # strictly positive pivots used
    witness: Vector | None  # v with v^T M v < 0 when not PSD

    @property
    def positive_pivot_count(self) -> int:
        return len(self.pivots)


def psd_check_exact(matrix: ExactMatrix) -> PsdResult:
    """Exact PSD decision by diagonal-pivot congruence elimination.

    Pivots on a strictly positive diagonal entry while one exists.  A
    negative diagonal entry, or a zero diagonal with a nonzero
    off-diagonal entry in the remaining block, yields an exact witness
    v with v^T M v < 0.
    """
    if not matrix.is_symmetric():
        raise ValueError("psd_check_exact requires a symmetric matrix")
    n = matrix.rows
    a = [list(row) for row in matrix.data]
    # Columns of basis express current coordinates in original ones, so a
    # witness found after elimination maps back exactly.
    basis = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    active = list(range(n))
    pivots: list[Q2Scalar] = []

    def witness_vec(coeffs: dict[int, Q2Scalar]) -> Vector:
        return tuple(
            sum((basis[i][j] * c for j, c in coeffs.items()), ZERO)
            for i in range(n)
        )

    while active:
        neg = next((k for k in active if a[k][k].sign() < 0), None)
        if neg is not None:
            return PsdResult(False, tuple(pivots), witness_vec({neg: ONE}))
        piv = next((k for k in active if a[k][k].sign() > 0), None)
        if piv is None:
            # All remaining diagonal entries are zero.
            for k in active:
                for l in active:
                    if l != k and not a[k][l].is_zero():
                        s = Q2Scalar(-a[k][l].sign())
                        return PsdResult(
                            False, tuple(pivots), witness_vec({k: ONE, l: s})
                        )
            return PsdResult(True, tuple(pivots), None)
        d = a[piv][piv]
        pivots.append(d)
        active.remove(piv)
        factors = {i: a[i][piv] / d for i in active}
        for i in active:
            fi = factors[i]
            if fi.is_zero():
                continue
            for j in range(n):
                a[i][j] = a[i][j] - fi * a[piv][j]
            for r in range(n):
                basis[r][i] = basis[r][i] - fi * basis[r][piv]
        for j in active:
            fj = factors[j]
            if not fj.is_zero():
                for i in range(n):
                    a[i][j] = a[i][j] - fj * a[i][piv]
    return PsdResult(True, tuple(pivots), None)


# ---------------------------------------------------------------------------
# Numeric symmetric eigensolver (cyclic Jacobi).
# ---------------------------------------------------------------------------

class JacobiError(RuntimeError):
    pass


def jacobi_eigh(
    matrix: np.ndarray,
    *,
    tol: float = 1e-13,
    max_sweeps: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Input must
    be symmetric within 1e-12; iterates until the off-diagonal Frobenius
    norm is at most ``tol`` times the matrix scale.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ValueError("jacobi_eigh requires a symmetric matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(np.max(np.abs(a), initial=0.0), 1.0)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum((a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                phi = 0.5 * math.atan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = math.cos(phi), math.sin(phi)
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
                a[p, q] = a[q, p] = 0.0 if abs(a[p, q]) < 1e-300 else a[p, q]
    else:
        raise JacobiError(f"no convergence after {max_sweeps} sweeps")
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals)
    return eigvals[order], v[:, order]


def eig_sym_numeric(matrix: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of a symmetric matrix (ascending)."""
    return jacobi_eigh(matrix)[0]
