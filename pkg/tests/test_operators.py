import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from rkhs_geometry import DHB, Fock, Tagged, direct_sum
from rkhs_geometry.metrics import delta, segment
from rkhs_geometry.operators import (
    ConditioningWarning,
    SpanOperator,
    berezin,
    commutator_norm,
    extremal_function,
    hankel_form_norm,
    hankel_gap_norm,
    max_point_value,
    multiplier_adjoint_action,
    projection,
    schatten_norm,
    singular_values,
    span_basis,
    variation_along_curve,
)

N_FEATURES = 400


def features(alpha, x):
    """Coefficients of k_x in the orthonormal basis sqrt(c_n) z^n of DHB(alpha), alpha > 0."""
    n = np.arange(N_FEATURES)
    # (1 - u)^-alpha = sum c_n u^n with c_n = Gamma(n + alpha) / (Gamma(alpha) n!)
    c = np.exp(gammaln(n + alpha) - gammaln(alpha) - gammaln(n + 1))
    return np.sqrt(c) * np.conj(complex(x)) ** n


def feature_operator(op, alpha):
    Phi = np.stack([features(alpha, p) for p in op.basis.points], axis=1)
    return Phi @ op.coeffs @ Phi.conj().T


def random_operator(rng, spec, pts, hermitian=False, basis=None):
    B = basis or span_basis(spec, pts)
    n = len(pts)
    C = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if hermitian:
        C = (C + C.conj().T) / 2
    return SpanOperator(B, C)


def test_projection_difference_example():
    B = span_basis(DHB(1.0), [0.0, 0.6])
    A = projection(B, 0) - projection(B, 1)
    assert abs(schatten_norm(A) - 0.6) < 1e-14
    assert abs(schatten_norm(A, 1) - 1.2) < 1e-14
    assert abs(schatten_norm(A, 2) - 0.6 * math.sqrt(2)) < 1e-14
    assert np.allclose(sorted(singular_values(A)), [0.6, 0.6], atol=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_schatten_norms_against_feature_map(alpha):
    rng = np.random.default_rng(int(alpha * 10))
    pts = 0.7 * rng.uniform(size=4) * np.exp(2j * np.pi * rng.uniform(size=4))
    op = random_operator(rng, DHB(alpha), pts)
    s = np.linalg.svd(feature_operator(op, alpha), compute_uv=False)
    for p in (1, 2, math.inf):
        expected = s.max() if p == math.inf else float(np.sum(s**p) ** (1 / p))
        assert abs(schatten_norm(op, p) - expected) <= 1e-9 * expected


def test_algebra_against_feature_map():
    rng = np.random.default_rng(1)
    pts = [0.1, -0.3j, 0.5 + 0.2j]
    basis = span_basis(DHB(1.0), pts)
    A = random_operator(rng, DHB(1.0), pts, basis=basis)
    B = random_operator(rng, DHB(1.0), pts, basis=basis)
    FA, FB = feature_operator(A, 1.0), feature_operator(B, 1.0)
    for op, ref in ((A + B, FA + FB), (A - B, FA - FB), (A * 2.5, 2.5 * FA), (A @ B, FA @ FB), (A.H, FA.conj().T)):
        assert np.allclose(feature_operator(op, 1.0), ref, atol=1e-9)


def test_berezin_against_feature_map():
    rng = np.random.default_rng(2)
    A = random_operator(rng, DHB(2.0), [0.2, 0.4j, -0.5], hermitian=True)
    F = feature_operator(A, 2.0)
    for x in (0.0, 0.3 - 0.3j, 0.85):
        k = features(2.0, x)
        ref = np.vdot(k, F @ k) / np.vdot(k, k)
        assert abs(berezin(A, x) - ref) < 1e-9
    B = span_basis(DHB(1.0), [0.0, 0.6])
    assert abs(berezin(projection(B, 0), 0.6) - 0.64) < 1e-14


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.95), st.floats(0, 6.28), st.floats(0, 0.95), st.floats(0, 6.28))
def test_commutator_identity(r1, t1, r2, t2):
    x, y = r1 * np.exp(1j * t1), r2 * np.exp(1j * t2)
    if abs(x - y) < 1e-3:
        return
    B = span_basis(DHB(2.0), [x, y])
    d = delta(DHB(2.0), x, y)
    assert abs(commutator_norm(B, 0, 1) ** 2 - d * d * (1 - d * d)) < 1e-10


def test_commutator_example_and_direct_sum():
    B = span_basis(DHB(1.0), [0.0, 0.5])
    assert abs(commutator_norm(B, 0, 1) - math.sqrt(0.75) / 2) < 1e-14
    ds = direct_sum(DHB(1.0), Fock(1.0))
    B = span_basis(ds, [Tagged("left", 0.1), Tagged("right", 0.1)])
    assert commutator_norm(B, 0, 1) < 1e-15
    assert abs(hankel_gap_norm(B, 0, 1) - 1.0) < 1e-14


def test_hankel_gap():
    B = span_basis(DHB(1.0), [0.0, 0.6])
    assert abs(hankel_gap_norm(B, 0, 1) - 0.6) < 1e-14
    assert abs(hankel_gap_norm(B, 0, 1, 1) - 1.2) < 1e-14
    # real pairs: the bilinear form agrees with the projection reduction
    assert abs(hankel_form_norm(B, 0, 1) - 0.6) < 1e-12
    B = span_basis(DHB(1.0), [0.3, 0.5j])
    assert abs(hankel_gap_norm(B, 0, 1) - delta(DHB(1.0), 0.3, 0.5j)) < 1e-14


def test_extremal_function():
    e = extremal_function(DHB(1.0), 0.0, 0.6)
    assert abs(e.value - 0.75) < 1e-14
    assert abs(e.func(0.0)) < 1e-14
    # delta(z, w) * ||k_w||
    e = extremal_function(Fock(1.0), 0.0, 1.0)
    assert abs(e.value - math.sqrt(1 - math.exp(-1)) * math.exp(0.5)) < 1e-13


def test_multiplier_adjoint():
    pts = [0.0, 0.3, -0.5j]
    B = span_basis(DHB(1.0), pts)
    A = multiplier_adjoint_action(B, pts)
    # adjoint of multiplication by z: eigenvectors k_x with eigenvalue conj(x)
    for x in pts:
        assert abs(berezin(A, x) - np.conj(x)) < 1e-14
    assert schatten_norm(A) <= 1 + 1e-12
    assert abs(max_point_value(span_basis(DHB(1.0), [0.0, 0.6]), 0.6) - 1.25) < 1e-14


def test_variation_of_projection_along_radius():
    B = span_basis(DHB(1.0), [0.0])
    v = variation_along_curve(projection(B, 0), segment(0.0, 0.9))
    assert abs(v.value - 0.81) < 1e-12
    assert v.value <= v.bound


def test_serialization_round_trip():
    rng = np.random.default_rng(5)
    A = random_operator(rng, DHB(1.0), [0.1, 0.2j])
    text = json.dumps(A.to_dict("dhb:alpha=1"))
    B = SpanOperator.from_dict(json.loads(text), DHB(1.0))
    assert np.array_equal(A.coeffs, B.coeffs)
    assert abs(schatten_norm(A) - schatten_norm(B)) == 0


def test_near_duplicate_points_warn():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        B = span_basis(DHB(1.0), [0.5, 0.5 + 1e-9])
    assert any(issubclass(w.category, ConditioningWarning) for w in rec)
    assert B.jitter > 0


def test_mixing_bases_is_rejected():
    from rkhs_geometry import ValidationError

    a = projection(span_basis(DHB(1.0), [0.0]), 0)
    b = projection(span_basis(DHB(1.0), [0.0]), 0)
    with pytest.raises(ValidationError):
        a + b
