"""Behaviors, expressions, local bounds, qubit realizations and the
order-8 slice symmetry."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdual.algebra import Q2Scalar
from qdual.scenario import (
    Behavior,
    BellExpression,
    QubitParams,
    all_local_vertices,
    behavior_from_json,
    behavior_from_qubit,
    behavior_to_json,
    chsh_expression,
    expression_from_json,
    expression_to_json,
    grad_qubit,
    hessian_qubit_fd,
    local_bound,
    local_vertex,
    pair,
    qubit_value,
    symmetry_behavior,
    symmetry_expr,
    symmetry_matrix,
    tsirelson_params,
    tsirelson_point,
)

RT2 = math.sqrt(2.0)


def test_tsirelson_point_values():
    pt = tsirelson_point()
    vec = pt.as_vector()
    assert np.allclose(vec[:4], 0.0)
    assert np.allclose(vec[4:], [1 / RT2, 1 / RT2, 1 / RT2, -1 / RT2])
    assert pt.kind == "exact"


def test_chsh_local_bound_is_two():
    bound, argmax = local_bound(chsh_expression())
    assert float(bound) == 2.0
    # CHSH is maximized on 8 of the 16 deterministic strategies
    assert len(argmax) == 8


def test_sixteen_distinct_vertices():
    vecs = [tuple(local_vertex(i).as_vector()) for i in all_local_vertices()]
    assert len(set(vecs)) == 16
    for v in vecs:
        assert all(x in (-1.0, 1.0) for x in v)


def test_vertex_correlators_are_products():
    for idx in all_local_vertices():
        v = local_vertex(idx).as_vector()
        # K_xy = <A_x><B_y> for deterministic strategies
        assert v[4] == v[0] * v[2]
        assert v[5] == v[0] * v[3]
        assert v[6] == v[1] * v[2]
        assert v[7] == v[1] * v[3]


def test_chsh_at_tsirelson_point():
    value = pair(chsh_expression(), tsirelson_point())
    assert isinstance(value, Q2Scalar)
    assert float(value) == pytest.approx(2 * RT2, abs=1e-15)


def test_qubit_tsirelson_realization():
    beh = behavior_from_qubit(tsirelson_params())
    assert beh.distance(tsirelson_point().to_float()) < 1e-12
    # alternate parameter assignment from the same family
    alt = QubitParams(math.pi / 4, 0.0, math.pi / 2, math.pi / 4, -math.pi / 4)
    assert behavior_from_qubit(alt).distance(tsirelson_point().to_float()) < 1e-12


def test_qubit_value_consistency():
    params = QubitParams(0.3, 0.1, 1.2, -0.7, 2.0)
    expr = chsh_expression()
    by_pair = float(pair(expr.to_float(), behavior_from_qubit(params)))
    assert qubit_value(expr, params) == pytest.approx(by_pair, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_gradient_matches_finite_differences(xs):
    params = QubitParams(*xs)
    expr = chsh_expression()
    g_analytic = grad_qubit(expr, params)
    g_fd = grad_qubit(expr, params, mode="finite_difference")
    assert np.max(np.abs(g_analytic - g_fd)) < 1e-6


def test_hessian_symmetric():
    h = hessian_qubit_fd(chsh_expression(), tsirelson_params())
    assert np.allclose(h, h.T)


# -- symmetry ---------------------------------------------------------------


def test_symmetry_matrix_signed_permutation():
    s = symmetry_matrix()
    assert s.shape == (8, 8)
    assert np.array_equal(np.abs(s) @ np.ones(8), np.ones(8))
    assert np.allclose(s.T @ s, np.eye(8))
    p = np.linalg.matrix_power(s, 8)
    assert np.array_equal(p, np.eye(8))
    assert not np.array_equal(np.linalg.matrix_power(s, 4), np.eye(8))


def test_symmetry_fixes_chsh_and_tsirelson():
    assert symmetry_expr(chsh_expression()).entries() == chsh_expression().entries()
    assert symmetry_behavior(tsirelson_point()).entries() == tsirelson_point().entries()


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(-5, 5), min_size=8, max_size=8),
    st.lists(st.integers(-5, 5), min_size=8, max_size=8),
)
def test_pairing_invariant_under_symmetry(es, bs):
    from qdual.scenario import behavior_from_vector, expression_from_vector

    expr = expression_from_vector(np.array(es, dtype=float))
    beh = behavior_from_vector(np.array(bs, dtype=float))
    lhs = pair(expr, beh)
    rhs = pair(symmetry_expr(expr), symmetry_behavior(beh))
    assert float(lhs) == pytest.approx(float(rhs), abs=1e-12)


def test_symmetry_permutes_vertices():
    vertex_set = {tuple(local_vertex(i).as_vector()) for i in all_local_vertices()}
    mapped = {
        tuple(symmetry_behavior(local_vertex(i).to_float()).as_vector())
        for i in all_local_vertices()
    }
    assert mapped == vertex_set


# -- serialization ----------------------------------------------------------


def test_expression_json_round_trip_exact():
    expr = chsh_expression()
    obj = expression_to_json(expr)
    again = expression_from_json(json.loads(json.dumps(obj)))
    assert again.entries() == expr.entries()
    assert again.kind == "exact"


def test_behavior_json_round_trip_float():
    beh = behavior_from_qubit(QubitParams(0.2, 0.4, 0.6, 0.8, 1.0))
    again = behavior_from_json(json.loads(json.dumps(behavior_to_json(beh))))
    assert again.entries() == beh.entries()  # bit-exact floats
