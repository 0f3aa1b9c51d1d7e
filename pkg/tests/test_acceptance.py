"""Acceptance gate: one test per criterion, each printing a single
pass/fail line with its pinned tolerances."""

import math
import time
from fractions import Fraction

import numpy as np

from qdual.algebra import INV_SQRT2, ONE, Q2Scalar, ZERO
from qdual.certificates import (
    monomials_of_level,
    nullifier_basis,
    verify_certificate,
    w3_certificate,
    w3_eigenvalues_float,
)
from qdual.family import (
    EXTREMAL_RADIUS,
    chsh_decompose_check,
    expose_check,
    expr_from_slice,
    octagon_vertices,
    tsirelson_expression,
)
from qdual.optimize import (
    dual_membership,
    face_scan,
    hessian_closed_form,
    hessian_rmax,
    npa_bound,
    qubit_max,
    rotated_tsirelson_params,
    sos_search,
)
from qdual.scenario import (
    QubitParams,
    behavior_from_vector,
    chsh_expression,
    expression_from_vector,
    grad_qubit,
    hessian_qubit_fd,
    pair,
    symmetry_behavior,
    symmetry_expr,
    tsirelson_point,
)

RT2 = math.sqrt(2.0)


def report(capsys, number, name, passed, detail=""):
    line = f"criterion {number} ({name}): {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f" — {detail}"
    with capsys.disabled():
        print(line)
    assert passed, line


def test_criterion_1_octagon_exactness(capsys):
    start = time.time()
    vertices = octagon_vertices()
    cos_table = [ONE, INV_SQRT2, ZERO, -INV_SQRT2, -ONE, -INV_SQRT2, ZERO, INV_SQRT2]
    sin_table = cos_table[6:] + cos_table[:6]
    ok = len(vertices) == 8 and all(
        v0 == EXTREMAL_RADIUS * cos_table[k] and v1 == EXTREMAL_RADIUS * sin_table[k]
        for k, (v0, v1) in enumerate(vertices)
    )
    elapsed = time.time() - start
    report(
        capsys, 1, "octagon exactness", ok and elapsed < 1.0,
        f"8 exact vertices (1-1/sqrt2)*(cos,sin)(k*pi/4), zero tolerance, {elapsed:.2f}s",
    )


def test_criterion_2_w3_certificate(capsys):
    start = time.time()
    rep = verify_certificate(tsirelson_expression(), w3_certificate())
    root = math.sqrt(10 - 7 * RT2)
    expected = np.sort(
        [(1 - root) / 8, (1 + root) / 8, (2 - RT2) / 8, (3 * RT2 / 2 - 1) / 8]
    )
    eig_err = float(np.max(np.abs(np.sort(w3_eigenvalues_float()) - expected)))
    ok = rep.passed and rep.identity_exact and rep.rank == 4 and eig_err < 1e-10
    elapsed = time.time() - start
    report(
        capsys, 2, "exact degree-3 certificate", ok and elapsed < 5.0,
        f"identity exact, PSD, rank 4, eigenvalue error {eig_err:.1e} < 1e-10, {elapsed:.2f}s",
    )


def test_criterion_3_nullifier_dimensions(capsys):
    start = time.time()
    dims = [
        nullifier_basis(monomials_of_level(tag)).dimension
        for tag in ("L1", "L1AB", "L1AB_ABB")
    ]
    ok = dims == [2, 5, 9]
    elapsed = time.time() - start
    report(
        capsys, 3, "nullifier dimensions", ok and elapsed < 1.0,
        f"dims {dims} == [2, 5, 9] exactly, {elapsed:.2f}s",
    )


def test_criterion_4_npa_bounds(capsys):
    start = time.time()
    chsh_err = abs(npa_bound(chsh_expression(), "L1") - 2 * RT2)
    radius = 1.0 / (4.0 * RT2)
    circle_errs = []
    for gamma in (0.0, math.pi / 8, math.pi / 4):
        expr = expr_from_slice(radius * math.cos(gamma), radius * math.sin(gamma))
        circle_errs.append(abs(npa_bound(expr, "L1AB") - 1.0))
    bt_l1ab = npa_bound(tsirelson_expression(), "L1AB")
    ok = chsh_err < 1e-5 and max(circle_errs) < 1e-4 and bt_l1ab > 1.001
    elapsed = time.time() - start
    report(
        capsys, 4, "moment-relaxation bounds", ok and elapsed < 60.0,
        f"CHSH@L1 err {chsh_err:.1e} < 1e-5, circle r=1/(4*sqrt2)@L1AB err "
        f"{max(circle_errs):.1e} < 1e-4, beta_T@L1AB {bt_l1ab:.5f} > 1.001, {elapsed:.1f}s",
    )


def test_criterion_5_sos_search(capsys):
    start = time.time()
    bt = tsirelson_expression()
    residuals = []
    ok = True
    for tag in ("L1AB_ABB", "L1AB_ABB_AAB"):
        cert = sos_search(bt, tag)
        if cert is None:
            ok = False
            continue
        rep = verify_certificate(bt, cert, float_tol=1e-7)
        residuals.append(rep.max_residual_coeff)
        ok = ok and rep.passed and rep.max_residual_coeff <= 1e-7
    outside = dual_membership(expr_from_slice(0.3, 0.0))
    vertex_witness = outside.verdict == "outside" and outside.witness is not None and all(
        abs(abs(x) - 1.0) < 1e-12 for x in outside.witness.as_vector()
    )
    ok = ok and vertex_witness
    elapsed = time.time() - start
    report(
        capsys, 5, "certificate search", ok and elapsed < 120.0,
        f"beta_T certified at both degree-3 levels, residuals "
        f"{[f'{r:.1e}' for r in residuals]} <= 1e-7; slice(0.3,0) outside with "
        f"local-vertex witness, {elapsed:.1f}s",
    )


def test_criterion_6_hessian_radius(capsys):
    start = time.time()
    worst = 0.0
    for gamma in (0.0, math.pi / 8, math.pi / 4):
        for source in ("closed_form", "finite_difference"):
            value = hessian_rmax(gamma, alpha_grid=64, tol=1e-4, source=source)
            worst = max(worst, abs(value - 0.5))
    ok = worst < 1e-3
    elapsed = time.time() - start
    report(
        capsys, 6, "second-order exclusion radius", ok and elapsed < 60.0,
        f"max |rmax - 0.5| = {worst:.1e} < 1e-3 over 3 angles x 2 sources, {elapsed:.1f}s",
    )


def test_criterion_7_face_scan(capsys):
    start = time.time()
    rep = face_scan(tsirelson_expression(), restarts=200)
    labels = sorted(c.classification for c in rep.clusters)
    ok = (
        abs(rep.best_value - 1.0) < 1e-7
        and labels == ["local L_{-1,-1,-1,1}", "local L_{-1,1,1,-1}", "tsirelson"]
    )
    elapsed = time.time() - start
    report(
        capsys, 7, "face scan", ok and elapsed < 120.0,
        f"value {rep.best_value:.9f} (tol 1e-7), clusters {labels}, {elapsed:.1f}s",
    )


def test_criterion_8_decomposition_and_exposure(capsys):
    start = time.time()
    dec = chsh_decompose_check()
    exp = expose_check()
    ok = dec.passed and exp.passed and exp.octagon_affine_dimension == 2
    elapsed = time.time() - start
    report(
        capsys, 8, "decomposition and exposure", ok and elapsed < 1.0,
        f"midpoint identity exact, exposing pairing 1 with unique slice point, "
        f"affine dimension 2, {elapsed:.2f}s",
    )


def test_criterion_9_property_suites(capsys):
    start = time.time()
    rng = np.random.default_rng(0)

    # algebra laws, 10^4 randomized cases
    algebra_ok = True
    for _ in range(10_000):
        p1, q1, p2, q2 = (Fraction(int(n), 8) for n in rng.integers(-40, 40, size=4))
        x = Q2Scalar(p1, q1)
        y = Q2Scalar(p2, q2)
        algebra_ok = algebra_ok and x * y == y * x and (x + y) - y == x
        if not x.is_zero():
            algebra_ok = algebra_ok and x * x.inverse() == ONE

    # exact pairing invariance under the order-8 symmetry
    pairing_ok = True
    for _ in range(100):
        e = expression_from_vector(rng.integers(-4, 5, size=8).astype(float))
        b = behavior_from_vector(rng.integers(-1, 2, size=8).astype(float))
        lhs = pair(e, b)
        rhs = pair(symmetry_expr(e), symmetry_behavior(b))
        pairing_ok = pairing_ok and float(lhs) == float(rhs)

    # gradient and Hessian finite-difference agreement
    grad_err = 0.0
    for _ in range(20):
        params = QubitParams(*rng.uniform(-3, 3, size=5))
        expr = expr_from_slice(*rng.normal(scale=0.3, size=2))
        g = grad_qubit(expr, params)
        g_fd = grad_qubit(expr, params, mode="finite_difference")
        grad_err = max(grad_err, float(np.max(np.abs(g - g_fd))))
    hess_err = 0.0
    for _ in range(5):
        r = rng.uniform(0, 0.6)
        gamma, alpha = rng.uniform(0, 2 * math.pi, size=2)
        closed = hessian_closed_form(r, gamma, alpha)
        fd = hessian_qubit_fd(
            expr_from_slice(r * math.cos(gamma), r * math.sin(gamma)),
            rotated_tsirelson_params(alpha),
        )
        hess_err = max(hess_err, float(np.max(np.abs(closed - fd))))

    # weak duality and level monotonicity
    duality_ok = True
    for _ in range(100):
        expr = expr_from_slice(*rng.normal(scale=0.3, size=2))
        upper = npa_bound(expr, "L1")
        lower, _ = qubit_max(expr, restarts=50)
        duality_ok = duality_ok and lower <= upper + 1e-5
    monotone_ok = True
    for _ in range(5):
        expr = expr_from_slice(*rng.normal(scale=0.3, size=2))
        v1 = npa_bound(expr, "L1")
        v2 = npa_bound(expr, "L1AB")
        v3 = npa_bound(expr, "L1AB_ABB")
        monotone_ok = monotone_ok and v1 >= v2 - 1e-6 and v2 >= v3 - 1e-6

    ok = (
        algebra_ok
        and pairing_ok
        and grad_err < 1e-6
        and hess_err < 1e-5
        and duality_ok
        and monotone_ok
    )
    elapsed = time.time() - start
    report(
        capsys, 9, "property suites", ok and elapsed < 120.0,
        f"10^4 algebra cases, exact pairing invariance, grad err {grad_err:.1e} < 1e-6, "
        f"hessian err {hess_err:.1e} < 1e-5, weak duality and monotonicity on "
        f"sampled slices, {elapsed:.1f}s",
    )
