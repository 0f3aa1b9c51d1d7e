"""Numeric optimization: small dense SDPs, NPA bounds, SOS search, the
second-order exclusion radius, qubit-realization maximization and
dual-membership classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import Monomial, Polynomial, UNIT
from .certificates import (
    RelaxationLevel,
    SOSCertificate,
    monomials_of_level,
    nullifier_basis,
    state_action_float,
    generating_sequence,
    verify_certificate,
)
from .family import expr_from_slice, tsirelson_expression
from .linalg import jacobi_eigh
from .scenario import (
    Behavior,
    BellExpression,
    LocalVertexIndex,
    QubitParams,
    behavior_from_qubit,
    grad_qubit,
    hessian_qubit_fd,
    local_bound,
    local_vertex,
    tsirelson_point,
)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SDPProblem:
    """maximize objective . y  subject to  F0 + sum_i y_i F_i >= 0."""

    f0: np.ndarray
    fs: tuple[np.ndarray, ...]
    objective: np.ndarray

    def __post_init__(self) -> None:
        n = self.f0.shape[0]
        if self.f0.shape != (n, n):
            raise ValueError("F0 must be square")
        for f in self.fs:
            if f.shape != (n, n):
                raise ValueError("constraint matrix size mismatch")
        if len(self.objective) != len(self.fs):
            raise ValueError("objective length mismatch")

    @property
    def size(self) -> int:
        return self.f0.shape[0]

    @property
    def num_vars(self) -> int:
        return len(self.fs)


@dataclass(frozen=True)
class SDPSolution:
    value: float
    y: np.ndarray
    matrix: np.ndarray
    status: str  # optimal | infeasible | max_iter
    dual_gap: float


def solve_sdp(problem: SDPProblem, tol: float = 1e-8) -> SDPSolution:
    """Solve the LMI-form SDP with cvxopt's interior-point conelp solver.

    Deterministic for fixed inputs.  Variables whose constraint matrix is
    identically zero are eliminated up front (cvxopt rejects rank-deficient
    data); an unbounded objective along such a variable raises.
    """
    import cvxopt
    import cvxopt.solvers

    n = problem.size
    active = [i for i, f in enumerate(problem.fs) if np.any(np.abs(f) > 0)]
    inactive = [i for i in range(problem.num_vars) if i not in active]
    if any(abs(problem.objective[i]) > 0 for i in inactive):
        raise SolverError("objective unbounded along unconstrained variable")
    if not active:
        feasible = bool(np.linalg.eigvalsh(problem.f0)[0] >= -tol)
        status = "optimal" if feasible else "infeasible"
        return SDPSolution(0.0, np.zeros(problem.num_vars), problem.f0, status, 0.0)

    g = cvxopt.matrix(
        np.column_stack([-problem.fs[i].reshape(n * n) for i in active])
    )
    h = cvxopt.matrix(problem.f0)
    c = cvxopt.matrix(-problem.objective[active])
    opts = {
        "show_progress": False,
        "abstol": tol,
        "reltol": tol,
        "feastol": min(tol * 10, 1e-7),
        "maxiters": 200,
    }
    saved = dict(cvxopt.solvers.options)
    cvxopt.solvers.options.update(opts)
    try:
        sol = cvxopt.solvers.sdp(c, Gs=[g], hs=[h])
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        raise SolverError(f"sdp solver breakdown: {exc}") from exc
    finally:
        cvxopt.solvers.options.clear()
        cvxopt.solvers.options.update(saved)

    status_map = {
        "optimal": "optimal",
        "primal infeasible": "infeasible",
        "dual infeasible": "infeasible",
        "unknown": "max_iter",
    }
    status = status_map.get(sol["status"], "max_iter")
    y = np.zeros(problem.num_vars)
    if sol["x"] is not None:
        for pos, i in enumerate(active):
            y[i] = sol["x"][pos]
    matrix = problem.f0 + sum(y[i] * problem.fs[i] for i in range(problem.num_vars))
    value = float(np.dot(problem.objective, y))
    gap = float(sol["gap"]) if sol["gap"] is not None else math.inf
    return SDPSolution(value, y, matrix, status, gap)


# ---------------------------------------------------------------------------
# NPA moment relaxation.
# ---------------------------------------------------------------------------

_BEHAVIOR_MONOS: dict[Monomial, int] = {
    Monomial.letter("A0"): 0,
    Monomial.letter("A1"): 1,
    Monomial.letter("B0"): 2,
    Monomial.letter("B1"): 3,
    Monomial.letter("A0") * Monomial.letter("B0"): 4,
    Monomial.letter("A0") * Monomial.letter("B1"): 5,
    Monomial.letter("A1") * Monomial.letter("B0"): 6,
    Monomial.letter("A1") * Monomial.letter("B1"): 7,
}


@dataclass(frozen=True)
class MomentStructure:
    """Cell labeling of the moment matrix of one relaxation level.

    Cells whose product monomials coincide (up to adjoint, since the
    moment matrix is taken real symmetric) share a free moment label; the
    unit cells are the constant 1.
    """

    level: RelaxationLevel
    cell_labels: tuple[tuple[Monomial, ...], ...]
    free_labels: tuple[Monomial, ...]

    @property
    def size(self) -> int:
        return self.level.size


def moment_structure(level: RelaxationLevel) -> MomentStructure:
    monos = level.monomials
    n = len(monos)
    labels = []
    seen: dict[Monomial, None] = {}
    for k in range(n):
        row = []
        for l in range(n):
            product = monos[k].adjoint() * monos[l]
            canonical = min(product, product.adjoint(), key=Monomial.sort_key)
            row.append(canonical)
            if canonical != UNIT and canonical not in seen:
                seen[canonical] = None
        labels.append(tuple(row))
    return MomentStructure(level, tuple(labels), tuple(seen))


def _npa_problem(expr: BellExpression, structure: MomentStructure) -> SDPProblem:
    n = structure.size
    index = {mono: i for i, mono in enumerate(structure.free_labels)}
    f0 = np.zeros((n, n))
    fs = [np.zeros((n, n)) for _ in structure.free_labels]
    for k in range(n):
        for l in range(n):
            label = structure.cell_labels[k][l]
            if label == UNIT:
                f0[k, l] = 1.0
            else:
                fs[index[label]][k, l] = 1.0
    vec = expr.as_vector()
    objective = np.zeros(len(fs))
    for mono, pos in _BEHAVIOR_MONOS.items():
        if mono in index:
            objective[index[mono]] = vec[pos]
    return SDPProblem(f0, tuple(fs), objective)


def npa_bound(
    expr: BellExpression,
    level: RelaxationLevel | str,
    tol: float = 1e-8,
) -> float:
    """Upper bound on the quantum value via the level's moment relaxation."""
    if isinstance(level, str):
        level = monomials_of_level(level)
    problem = _npa_problem(expr, moment_structure(level))
    solution = solve_sdp(problem, tol)
    if solution.status != "optimal":
        raise SolverError(f"npa relaxation did not converge: {solution.status}")
    return solution.value


# ---------------------------------------------------------------------------
# Numeric SOS certificate search.
# ---------------------------------------------------------------------------

def _pair_polynomials(polys: Sequence[Polynomial]) -> list[Polynomial]:
    """N_k^dagger N_k for k = l, anticommutators for k < l, in w-vector order."""
    out = []
    adj = [p.adjoint() for p in polys]
    for k in range(len(polys)):
        for l in range(k, len(polys)):
            if k == l:
                out.append(adj[k] * polys[k])
            else:
                out.append(adj[k] * polys[l] + adj[l] * polys[k])
    return out


def _w_vector_to_matrix(w: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n))
    pos = 0
    for k in range(n):
        for l in range(k, n):
            out[k, l] = out[l, k] = w[pos]
            pos += 1
    return out


def sos_search(
    expr: BellExpression,
    level: RelaxationLevel | str,
    tol: float = 1e-7,
) -> SOSCertificate | None:
    """Search for a float Gram certificate of quantum bound 1 at a level.

    Solves max lambda_min(W) over the affine space of symmetric W matching
    1 - beta coefficient-wise over the level's nullifier basis; feasible
    when the optimum is >= -tol.  Returns None when no certificate exists.
    """
    if isinstance(level, str):
        level = monomials_of_level(level)
    basis = nullifier_basis(level).polys
    n = len(basis)
    pair_polys = _pair_polynomials(basis)

    target = Polynomial.one() - (
        expr.to_polynomial()
        if expr.kind == "exact"
        else _float_expression_polynomial(expr)
    )
    monomials: dict[Monomial, int] = {}
    for poly in [*pair_polys, target]:
        for mono in poly.terms():
            monomials.setdefault(mono, len(monomials))
    rows = len(monomials)
    a = np.zeros((rows, len(pair_polys)))
    for j, poly in enumerate(pair_polys):
        for mono, coeff in poly.terms().items():
            a[monomials[mono], j] = float(coeff)
    b = np.zeros(rows)
    for mono, coeff in target.terms().items():
        b[monomials[mono]] = float(coeff)

    w0, *_ = np.linalg.lstsq(a, b, rcond=None)
    if float(np.linalg.norm(a @ w0 - b)) > 1e-9:
        return None  # coefficient matching itself is impossible
    _, s, vt = np.linalg.svd(a)
    null_mask = np.zeros(a.shape[1], dtype=bool)
    null_mask[len(s):] = True
    null_mask[: len(s)] |= s < 1e-10
    null_basis = vt[null_mask]

    w0_mat = _w_vector_to_matrix(w0, n)
    fs = [_w_vector_to_matrix(row, n) for row in null_basis]
    fs.append(-np.eye(n))  # the lambda_min slack variable
    objective = np.zeros(len(fs))
    objective[-1] = 1.0
    problem = SDPProblem(w0_mat, tuple(fs), objective)
    solution = solve_sdp(problem, min(tol * 1e-2, 1e-9))
    if solution.status != "optimal":
        raise SolverError(f"sos feasibility sdp failed: {solution.status}")
    if solution.value < -tol:
        return None
    z = solution.y[:-1]
    gram = w0_mat + sum(zi * f for zi, f in zip(z, fs[:-1]))
    # Clip tiny negative eigenvalues so the certificate verifies cleanly.
    eigvals, eigvecs = np.linalg.eigh(gram)
    gram = (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.T
    return SOSCertificate(tuple(basis), gram, expr)


def _float_expression_polynomial(expr: BellExpression) -> Polynomial:
    from fractions import Fraction

    from .algebra import Q2Scalar

    vec = expr.as_vector()
    terms = {}
    for mono, pos in _BEHAVIOR_MONOS.items():
        if vec[pos] != 0.0:
            terms[mono] = Q2Scalar(Fraction(float(vec[pos])))
    return Polynomial(terms)


# ---------------------------------------------------------------------------
# Second-order exclusion radius.
# ---------------------------------------------------------------------------

def hessian_closed_form(r: float, gamma: float, alpha: float) -> np.ndarray:
    """Closed-form 5x5 Hessian of the slice family along the rotated
    Tsirelson realizations, in polar slice coordinates.

    Derivative order is (theta, a0, a1, b0, b1); gamma is the polar angle
    of (r0, r1) in the convention of ``expr_from_slice`` (cross-checked
    against the finite-difference Hessian on the alpha-path).
    """
    s, c = math.sin, math.cos
    q = math.pi / 4
    h = np.zeros((5, 5))
    h[0, 0] = -2.0
    h[1, 0] = 2.0 * r * s(alpha) * s(gamma + q)
    h[2, 0] = 2.0 * r * c(alpha) * s(-gamma + q)
    h[3, 0] = -2.0 * r * c(gamma) * s(alpha + q)
    h[4, 0] = 2.0 * r * s(gamma) * s(-alpha + q)
    h[1, 1] = h[2, 2] = h[3, 3] = h[4, 4] = -0.5
    h[3, 1] = h[3, 2] = h[4, 1] = h[4, 2] = 0.25
    return h + h.T - np.diag(np.diag(h))


def rotated_tsirelson_params(alpha: float) -> QubitParams:
    """The one-parameter family of realizations of the Tsirelson point."""
    q = math.pi / 4
    return QubitParams(q, alpha, 2 * q + alpha, q + alpha, -q + alpha)


def _hessian_at(source: str, r: float, gamma: float, alpha: float) -> np.ndarray:
    if source == "closed_form":
        return hessian_closed_form(r, gamma, alpha)
    if source == "finite_difference":
        expr = expr_from_slice(r * math.cos(gamma), r * math.sin(gamma))
        return hessian_qubit_fd(expr, rotated_tsirelson_params(alpha))
    raise ValueError(f"unknown hessian source {source!r}")


def hessian_rmax(
    gamma: float,
    alpha_grid: int = 256,
    tol: float = 1e-4,
    source: str = "closed_form",
) -> float:
    """Largest radius at which the Hessian stays negative semidefinite for
    every simultaneous-rotation angle alpha, by bisection on the radius.

    The universal quantifier over alpha is discretized on a uniform grid
    with local refinement around the active maximum; the finite-difference
    source gets a larger negativity slack to absorb its O(1e-6) noise.
    """
    if alpha_grid < 64:
        raise ValueError("alpha_grid must be at least 64")
    slack = 1e-10 if source == "closed_form" else 5e-6
    alphas = np.linspace(0.0, 2.0 * math.pi, alpha_grid, endpoint=False)

    def max_eig(r: float) -> float:
        values = [
            float(jacobi_eigh(_hessian_at(source, r, gamma, a))[0][-1])
            for a in alphas
        ]
        best = int(np.argmax(values))
        # Refine around the active alpha.
        lo = alphas[best] - 2.0 * math.pi / alpha_grid
        hi = alphas[best] + 2.0 * math.pi / alpha_grid
        fine = np.linspace(lo, hi, 17)
        refined = max(
            float(jacobi_eigh(_hessian_at(source, r, gamma, a))[0][-1])
            for a in fine
        )
        return max(max(values), refined)

    def feasible(r: float) -> bool:
        return max_eig(r) <= slack

    lo, hi = 0.0, 1.0
    if not feasible(lo):
        return 0.0
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Qubit-realization maximization and face scans.
# ---------------------------------------------------------------------------

def _start_points(restarts: int, seed: int) -> list[np.ndarray]:
    starts = []
    quarter = math.pi / 4
    for theta in (0.0, quarter / 2, quarter):
        for a0 in (0.0, math.pi):
            for a1 in (0.0, math.pi):
                for b0 in (0.0, math.pi):
                    for b1 in (0.0, math.pi):
                        starts.append(np.array([theta, a0, a1, b0, b1]))
    starts.append(tsirelson_params_array())
    rng = np.random.default_rng(seed)
    while len(starts) < max(restarts, len(starts)):
        vec = rng.uniform(0.0, 2.0 * math.pi, size=5)
        vec[0] = rng.uniform(0.0, math.pi / 4)
        starts.append(vec)
    return starts[: max(restarts, 49)]


def tsirelson_params_array() -> np.ndarray:
    q = math.pi / 4
    return np.array([q, q, -q, 0.0, 2 * q])


def qubit_max(
    expr: BellExpression,
    restarts: int = 50,
    tol: float = 1e-7,
    seed: int = 0,
) -> tuple[float, list[QubitParams]]:
    """Best value of the expression over qubit Z-X realizations.

    Multi-start ascent (analytic gradients) from a deterministic coarse
    grid plus seeded random starts; returns the best value and the distinct
    maximizers within ``tol`` of it, deduplicated by behavior distance.
    """
    vec = expr.as_vector()

    def neg_value(x: np.ndarray) -> float:
        return -qubit_value_vec(vec, x)

    def neg_grad(x: np.ndarray) -> np.ndarray:
        return -grad_qubit(expr, QubitParams.from_array(x))

    results: list[tuple[float, np.ndarray]] = []
    for x0 in _start_points(restarts, seed):
        res = minimize(neg_value, x0, jac=neg_grad, method="BFGS",
                       options={"gtol": 1e-11, "maxiter": 300})
        results.append((float(-res.fun), res.x))
    best = max(v for v, _ in results)
    winners: list[np.ndarray] = []
    behaviors: list[np.ndarray] = []
    for value, x in sorted(results, key=lambda t: -t[0]):
        if value < best - tol:
            continue
        beh = behavior_from_qubit(QubitParams.from_array(x)).as_vector()
        if all(np.linalg.norm(beh - other) > 1e-6 for other in behaviors):
            winners.append(x)
            behaviors.append(beh)
    return best, [QubitParams.from_array(x) for x in winners]


def qubit_value_vec(expr_vec: np.ndarray, x: np.ndarray) -> float:
    theta, a0, a1, b0, b1 = x
    c2t, s2t = math.cos(2 * theta), math.sin(2 * theta)
    ca = (math.cos(a0), math.cos(a1))
    sa = (math.sin(a0), math.sin(a1))
    cb = (math.cos(b0), math.cos(b1))
    sb = (math.sin(b0), math.sin(b1))
    out = 0.0
    out += expr_vec[0] * c2t * ca[0] + expr_vec[1] * c2t * ca[1]
    out += expr_vec[2] * c2t * cb[0] + expr_vec[3] * c2t * cb[1]
    pos = 4
    for x_ in range(2):
        for y_ in range(2):
            out += expr_vec[pos] * (ca[x_] * cb[y_] + s2t * sa[x_] * sb[y_])
            pos += 1
    return out


@dataclass(frozen=True)
class FaceCluster:
    behavior: Behavior
    value: float
    classification: str  # "tsirelson" | "local L_{i,j,k,l}" | "other"
    members: int


@dataclass(frozen=True)
class FaceScanReport:
    best_value: float
    clusters: tuple[FaceCluster, ...]


def face_scan(
    expr: BellExpression,
    restarts: int = 200,
    tol: float = 1e-6,
    seed: int = 0,
) -> FaceScanReport:
    """Cluster the maximizers of the expression over qubit realizations and
    classify each cluster center as the Tsirelson point, a deterministic
    vertex, or neither."""
    best, winners = qubit_max(expr, restarts=restarts, tol=tol, seed=seed)
    centers: list[np.ndarray] = []
    counts: list[int] = []
    for params in winners:
        beh = behavior_from_qubit(params).as_vector()
        placed = False
        for i, center in enumerate(centers):
            if np.linalg.norm(beh - center) <= 1e-5:
                counts[i] += 1
                placed = True
                break
        if not placed:
            centers.append(beh)
            counts.append(1)

    pt = tsirelson_point().as_vector()
    vertex_table = {
        idx: local_vertex(idx).as_vector()
        for idx in _all_vertex_indices()
    }
    clusters = []
    for center, count in zip(centers, counts):
        if np.linalg.norm(center - pt) <= 1e-5:
            label = "tsirelson"
        else:
            label = "other"
            for idx, vert in vertex_table.items():
                if np.linalg.norm(center - vert) <= 1e-5:
                    label = f"local L_{{{idx.i},{idx.j},{idx.k},{idx.l}}}"
                    break
        from .scenario import behavior_from_vector

        clusters.append(
            FaceCluster(
                behavior=behavior_from_vector(center),
                value=best,
                classification=label,
                members=count,
            )
        )
    return FaceScanReport(best_value=best, clusters=tuple(clusters))


def _all_vertex_indices() -> list[LocalVertexIndex]:
    from .scenario import all_local_vertices

    return all_local_vertices()


# ---------------------------------------------------------------------------
# Projected-nullifier residuals along the face of the extremal expression.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionReport:
    components: np.ndarray  # action of N0 - N2 on the parametrized state
    closed_forms: np.ndarray  # the same four residuals from the closed forms
    max_mismatch: float
    projected_identity: float  # residual of the combined projected equation
    stationarity_b0: float  # first-order variation of the extremal expression
    compatibility: float  # cos(2 theta) sin(b0); zero at every maximizer


def projection_check(params: QubitParams) -> ProjectionReport:
    """Residuals of the projected nullifier equations of the degree-3
    certificate along the qubit family, against two independent evaluations."""
    seq = generating_sequence()
    diff = seq[0] - seq[2]
    action = state_action_float(diff, params)
    # components ordered |00>, |01>, |10>, |11>
    ct, st = math.cos(params.theta), math.sin(params.theta)
    c2t, s2t = math.cos(2 * params.theta), math.sin(2 * params.theta)
    ca = (math.cos(params.a0), math.cos(params.a1))
    sa = (math.sin(params.a0), math.sin(params.a1))
    cb0, sb0 = math.cos(params.b0), math.sin(params.b0)
    rt2 = math.sqrt(2.0)

    sum_c = ca[0] + ca[1]
    sum_s = sa[0] + sa[1]
    eq1 = (ct * sum_c / rt2 - ct * cb0) - (
        ct - sum(ct * ca[x] * cb0 + st * sa[x] * sb0 for x in range(2)) / rt2
    )
    eq2 = (-st * sum_c / rt2 + st * cb0) - (
        st - sum(st * ca[x] * cb0 + ct * sa[x] * sb0 for x in range(2)) / rt2
    )
    eq3 = (st * sum_s / rt2 - ct * sb0) - (
        -sum(ct * ca[x] * sb0 - st * sa[x] * cb0 for x in range(2)) / rt2
    )
    eq4 = (ct * sum_s / rt2 - st * sb0) - (
        -sum(-st * ca[x] * sb0 + ct * sa[x] * cb0 for x in range(2)) / rt2
    )
    closed = np.array([eq1, eq3, eq4, eq2])
    mismatch = float(np.max(np.abs(action - closed)))

    projected = c2t * sb0 + sum(-ca[x] * sb0 + s2t * sa[x] * cb0 for x in range(2)) / rt2

    r0 = 1.0 - 1.0 / rt2
    stationarity = -r0 * c2t * sb0 + sum(
        -ca[x] * sb0 + s2t * sa[x] * cb0 for x in range(2)
    ) / (2.0 * rt2)

    return ProjectionReport(
        components=action,
        closed_forms=closed,
        max_mismatch=mismatch,
        projected_identity=projected,
        stationarity_b0=stationarity,
        compatibility=c2t * sb0,
    )


# ---------------------------------------------------------------------------
# Dual membership.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipReport:
    verdict: str  # "inside" | "outside" | "unknown"
    certificate: SOSCertificate | None = None
    certified_level: str | None = None
    witness: Behavior | None = None
    witness_value: float = 0.0

    def summary(self) -> str:
        if self.verdict == "inside":
            return f"inside (certificate at level {self.certified_level})"
        if self.verdict == "outside":
            return f"outside (witness value {self.witness_value:.6f} > 1)"
        return "unknown"


def dual_membership(
    expr: BellExpression,
    levels: Sequence[str] = ("L1", "L1AB", "L1AB_ABB", "L1AB_ABB_AAB"),
    tol: float = 1e-6,
) -> MembershipReport:
    """Classify an expression against the dual of the quantum set.

    Outside when the local bound or a qubit realization beats 1 (witness
    attached); inside when an SOS certificate is found at some level;
    unknown otherwise.  Never both.
    """
    bound, argmax = local_bound(expr)
    bound_f = float(bound)
    if bound_f > 1.0 + (0.0 if expr.kind == "exact" else tol):
        witness = local_vertex(argmax[0])
        return MembershipReport(
            "outside", witness=witness, witness_value=bound_f
        )
    value, winners = qubit_max(expr, restarts=60, tol=1e-7)
    if value > 1.0 + tol:
        witness = behavior_from_qubit(winners[0])
        return MembershipReport("outside", witness=witness, witness_value=value)
    for tag in levels:
        cert = sos_search(expr, tag, tol=1e-7)
        if cert is not None:
            report = verify_certificate(expr, cert, float_tol=1e-6)
            if report.passed:
                return MembershipReport(
                    "inside", certificate=cert, certified_level=tag
                )
    return MembershipReport("unknown")
