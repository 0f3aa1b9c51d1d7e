"""Nullifier bases, the exact degree-3 Gram certificate and its verification."""

import json
import math

import numpy as np
import pytest

from qdual.algebra import INV_SQRT2, Polynomial, Q2Scalar, parse_polynomial
from qdual.certificates import (
    LEVEL_TAGS,
    SOSCertificate,
    certificate_from_json,
    certificate_to_json,
    generating_sequence,
    gram_expand,
    monomials_of_level,
    nullifier_basis,
    state_action_exact,
    state_action_float,
    verify_certificate,
    w3_certificate,
    w3_eigenvalues_float,
)
from qdual.family import tsirelson_expression
from qdual.linalg import ExactMatrix
from qdual.scenario import QubitParams, chsh_expression, tsirelson_params


def test_level_sizes():
    assert [monomials_of_level(t).size for t in LEVEL_TAGS] == [5, 9, 13, 17]


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        monomials_of_level("L2")


@pytest.mark.parametrize(
    "tag,dim", [("L1", 2), ("L1AB", 5), ("L1AB_ABB", 9), ("L1AB_ABB_AAB", 13)]
)
def test_nullifier_dimensions(tag, dim):
    basis = nullifier_basis(monomials_of_level(tag))
    assert basis.dimension == dim
    # every basis element annihilates the reference state exactly
    for poly in basis.polys:
        assert all(c.is_zero() for c in state_action_exact(poly))


def test_generating_sequence_nullifies():
    seq = generating_sequence()
    assert len(seq) == 9
    for poly in seq:
        assert all(c.is_zero() for c in state_action_exact(poly))


def test_state_action_float_matches_exact_at_tsirelson():
    for poly in generating_sequence():
        numeric = state_action_float(poly, tsirelson_params())
        assert np.max(np.abs(numeric)) < 1e-12


def test_state_action_float_generic_params():
    # N0 must not nullify a generic non-maximizing realization
    seq = generating_sequence()
    out = state_action_float(seq[0], QubitParams(0.2, 0.3, 0.9, 1.4, -0.5))
    assert np.max(np.abs(out)) > 1e-3


# -- the exact certificate --------------------------------------------------


def test_w3_verifies_exactly():
    report = verify_certificate(tsirelson_expression(), w3_certificate())
    assert report.passed
    assert report.identity_exact
    assert report.rank == 4
    assert report.psd.positive_pivot_count == 4


def test_w3_eigenvalues_closed_form():
    vals = np.sort(w3_eigenvalues_float())  # the four nonzero ones
    root = math.sqrt(10 - 7 * math.sqrt(2))
    expected = np.sort(
        [
            (1 - root) / 8,
            (1 + root) / 8,
            (2 - math.sqrt(2)) / 8,
            (3 * math.sqrt(2) / 2 - 1) / 8,
        ]
    )
    assert np.max(np.abs(vals - expected)) < 1e-10
    assert np.all(vals > 0)
    # numeric spectrum of the Gram matrix agrees: rank 4 with these values
    gram = w3_certificate().gram.to_float()
    full = np.sort(np.linalg.eigvalsh(gram))
    assert np.max(np.abs(full[:2])) < 1e-14
    assert np.max(np.abs(np.sort(full[2:]) - expected)) < 1e-12


def test_gram_expand_reproduces_target():
    cert = w3_certificate()
    expanded = gram_expand(cert.basis, cert.gram)
    target = Polynomial.one() - tsirelson_expression().to_polynomial()
    assert expanded == target


def test_perturbed_certificate_fails():
    cert = w3_certificate()
    rows = [list(r) for r in cert.gram.data]
    rows[0][0] = rows[0][0] + Q2Scalar(1)
    bad = SOSCertificate(cert.basis, ExactMatrix(rows), cert.target)
    report = verify_certificate(tsirelson_expression(), bad)
    assert not report.passed


def test_non_psd_certificate_fails():
    cert = w3_certificate()
    rows = [[-e for e in r] for r in cert.gram.data]
    bad = SOSCertificate(cert.basis, ExactMatrix(rows), cert.target)
    report = verify_certificate(
        tsirelson_expression().scale(Q2Scalar(-1)) + chsh_expression().scale(Q2Scalar(0)),
        bad,
    )
    assert not report.passed


def test_chsh_level1_certificate():
    # (1/4) identity over the two L1 nullifiers certifies CHSH/(2 sqrt2)
    basis = nullifier_basis(monomials_of_level("L1")).polys
    quarter = Q2Scalar(1) / 4
    zero = Q2Scalar(0)
    gram = ExactMatrix([[quarter, zero], [zero, quarter]])
    target = chsh_expression().scale(INV_SQRT2 * Q2Scalar(1) / 2)
    cert = SOSCertificate(tuple(basis), gram, target)
    report = verify_certificate(target, cert)
    assert report.passed


def test_certificate_json_round_trip():
    cert = w3_certificate()
    obj = json.loads(json.dumps(certificate_to_json(cert)))
    again = certificate_from_json(obj)
    assert again.gram == cert.gram
    assert [str(p) for p in again.basis] == [str(p) for p in cert.basis]
    assert again.target.entries() == cert.target.entries()


def test_float_certificate_verification_path():
    cert = w3_certificate()
    float_cert = SOSCertificate(
        cert.basis, cert.gram.to_float(), cert.target.to_float()
    )
    report = verify_certificate(cert.target, float_cert, float_tol=1e-8)
    assert report.passed
    assert not report.identity_exact  # float route never claims exactness
