import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh_tridiagonal

from petras.errors import DomainError
from petras.integrands import complex_bounds, get_integrand
from petras.quadrature import (CLENSHAW_CURTIS, GAUSS, EvalCounter, QuadratureSpec,
                               apply, apply_many, build_rule, get_spec, required_points)


def golub_welsch(n):
    """Gauss-Legendre nodes and weights from the Jacobi matrix eigenproblem."""
    k = np.arange(1, n)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    x, V = eigh_tridiagonal(np.zeros(n), off)
    return x, 2.0 * V[0, :] ** 2


def moment_weights(x):
    """Interpolatory weights on nodes ``x`` by matching Chebyshev moments."""
    n = len(x)
    T = np.polynomial.chebyshev.chebvander(x, n - 1).T
    mom = np.array([(1 + (-1) ** k) / (1 - k * k) if k != 1 else 0.0 for k in range(n)])
    return np.linalg.solve(T, mom)


def test_specs():
    assert (GAUSS.D, GAUSS.E) == (2.0, 4.0)
    assert (CLENSHAW_CURTIS.D, CLENSHAW_CURTIS.E) == (3.0, 2.0)
    assert get_spec("cc") is CLENSHAW_CURTIS
    with pytest.raises(DomainError):
        QuadratureSpec("gauss", 3.0, 2.0)
    with pytest.raises(DomainError):
        get_spec("trapezoid")


def test_required_points_examples():
    assert required_points(GAUSS, 2.0, 2.0, 1.0, 1e-6) == 12
    assert required_points(CLENSHAW_CURTIS, 2.0, 2.0, 1.0, 1e-6) == 25
    assert required_points(GAUSS, 2.0, 2.0, 1.0, 16.0) == 1
    assert required_points(GAUSS, 2.0, 2.0, 1.0, 1e3) == 1
    with pytest.raises(DomainError):
        required_points(GAUSS, 2.0, 2.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        required_points(GAUSS, 2.0, 1.0, 1.0, 1e-3)


@given(st.floats(1e-3, 10), st.floats(1.01, 5), st.floats(1e-3, 10), st.floats(1e-12, 1e-1))
def test_required_points_is_minimal(L, c, M, eps):
    for spec in (GAUSS, CLENSHAW_CURTIS):
        n = required_points(spec, L, c, M, eps)
        bound = lambda k: 2 * spec.D * L * c * M * spec.E ** (-k)
        assert bound(n) <= eps * (1 + 1e-12) or n == 1
        if n > 1:
            assert bound(n - 1) > eps * (1 - 1e-12)


def test_small_rules():
    r = build_rule(GAUSS, 1)
    assert r.nodes.tolist() == [0.0] and r.weights.tolist() == [2.0]
    r = build_rule(GAUSS, 2)
    np.testing.assert_allclose(r.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(r.weights, [1.0, 1.0], rtol=1e-15)
    r = build_rule(CLENSHAW_CURTIS, 3)
    np.testing.assert_allclose(r.nodes, [-1, 0, 1], atol=1e-16)
    np.testing.assert_allclose(r.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)
    with pytest.raises(DomainError):
        build_rule(GAUSS, 0)


@pytest.mark.parametrize("n", range(1, 41))
def test_gauss_against_golub_welsch(n):
    r = build_rule(GAUSS, n)
    x, w = golub_welsch(n)
    np.testing.assert_allclose(r.nodes, x, atol=1e-14)
    np.testing.assert_allclose(r.weights, w, atol=1e-14)


@pytest.mark.parametrize("n", range(2, 30))
def test_clenshaw_curtis_against_moments(n):
    r = build_rule(CLENSHAW_CURTIS, n)
    np.testing.assert_allclose(r.nodes, -np.cos(np.pi * np.arange(n) / (n - 1)), atol=1e-15)
    np.testing.assert_allclose(r.weights, moment_weights(r.nodes), atol=1e-13)


@pytest.mark.parametrize("spec", [GAUSS, CLENSHAW_CURTIS])
@pytest.mark.parametrize("n", [1, 2, 3, 7, 12, 25, 60])
def test_rule_invariants(spec, n):
    r = build_rule(spec, n)
    assert abs(r.weights.sum() - 2.0) <= 1e-12
    assert np.all(np.diff(r.nodes) > 0)
    np.testing.assert_array_equal(r.nodes, -r.nodes[::-1])


@pytest.mark.parametrize("n", range(1, 16))
def test_gauss_polynomial_exactness(n):
    r = build_rule(GAUSS, n)
    for k in range(2 * n):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        got = apply(r, lambda x: x ** k, -1.0, 1.0)
        assert got == pytest.approx(exact, rel=1e-10, abs=1e-12)


def test_apply_examples():
    c = EvalCounter()
    assert apply(build_rule(GAUSS, 3), lambda x: np.ones_like(x), 0.0, 3.0, c) == pytest.approx(3.0, rel=1e-15)
    assert c.count == 3
    got = apply(build_rule(GAUSS, 12), np.exp, -1.0, 1.0)
    assert abs(got - (math.e - 1 / math.e)) < 1e-12
    assert abs(apply(build_rule(GAUSS, 2), lambda x: x ** 3, -1.0, 1.0)) < 1e-14
    with pytest.raises(DomainError):
        apply(build_rule(GAUSS, 2), np.exp, 1.0, 1.0)
    with pytest.raises(DomainError), np.errstate(divide="ignore"):
        apply(build_rule(GAUSS, 2), lambda x: 1 / (x - x), 0.0, 1.0)


@given(st.floats(-5, 5), st.floats(1e-3, 5))
@settings(max_examples=100)
def test_affine_pullback_identity(a, d):
    b = a + d
    r = build_rule(GAUSS, 7)
    f = np.sin
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    pulled = apply(r, lambda t: f(mid + half * t), -1.0, 1.0)
    assert apply(r, f, a, b) == half * pulled


def test_apply_many_matches_apply():
    r = build_rule(CLENSHAW_CURTIS, 9)
    lo = np.array([-1.0, 0.0, 0.3])
    hi = np.array([-0.5, 0.2, 1.0])
    c = EvalCounter()
    many = apply_many(r, np.exp, lo, hi, c)
    assert c.count == 27
    for i in range(3):
        assert many[i] == pytest.approx(apply(r, np.exp, lo[i], hi[i]), rel=1e-15)


@pytest.mark.parametrize("name", ["exp_x", "sin_x", "recip:3"])
@pytest.mark.parametrize("spec", [GAUSS, CLENSHAW_CURTIS])
def test_error_contract(name, spec):
    f = get_integrand(name)
    rng = np.random.default_rng(6)
    ends = np.sort(rng.uniform(-1, 1, (100, 2)), axis=1)
    lo, hi = ends[:, 0], ends[:, 1]
    m = complex_bounds(f, lo, hi, 1.25)
    exact = np.array([f.exact_integral(a, b) for a, b in zip(lo, hi)])
    for n in range(2, 21):
        q = apply_many(build_rule(spec, n), f.real_eval, lo, hi)
        assert np.all(np.abs(q - exact) <= spec.D * spec.E ** (-n) * (hi - lo) * m)


@pytest.mark.parametrize("spec", [GAUSS, CLENSHAW_CURTIS])
def test_weights_sum_to_two_exactly(spec):
    for n in range(1, 120):
        w = build_rule(spec, n).weights
        assert math.fsum(w) == 2.0
        np.testing.assert_array_equal(w, w[::-1])


@pytest.mark.parametrize("spec", [GAUSS, CLENSHAW_CURTIS])
@pytest.mark.parametrize("n", [3, 12, 25, 40])
def test_constants_are_integrated_exactly(spec, n):
    r = build_rule(spec, n)
    assert apply(r, lambda x: np.ones_like(x), -1.0, 1.0) == 2.0
    got = apply_many(r, lambda x: np.full_like(x, 3.0), np.array([-1.0, 0.0]), np.array([0.0, 0.5]))
    assert got.tolist() == [3.0, 1.5]
