"""Sparse polynomial arithmetic and the determinantal constraint system."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teneig.poly import ConstraintSystem, Polynomial, build_jacobian_system
from teneig.tensor_core import SymmetricTensor, b_tensor


def _random_poly(rng, n, deg, terms=5):
    out = {}
    for _ in range(terms):
        alpha = tuple(int(e) for e in rng.multinomial(rng.integers(0, deg + 1),
                                                      [1.0 / n] * n))
        out[alpha] = out.get(alpha, 0.0) + float(rng.standard_normal())
    return Polynomial(n, out)


def test_constructor_validates_exponents():
    with pytest.raises(ValueError):
        Polynomial(2, {(1, 2, 3): 1.0})
    with pytest.raises(ValueError):
        Polynomial(2, {(-1, 0): 1.0})


def test_constructor_merges_duplicate_keys():
    p = Polynomial(2, {(1, 0): 2.0})
    q = Polynomial(2, {(1, 0): -2.0})
    assert p.add(q).is_zero()


def test_evaluate_matches_doc_example():
    p = Polynomial(2, {(3, 0): 1.0, (1, 2): 3.0})
    assert p.evaluate([1.0, 2.0]) == pytest.approx(13.0)


def test_degree_and_homogeneity():
    assert Polynomial.zero(3).degree() == 0
    assert Polynomial.zero(3).is_homogeneous()
    p = Polynomial(2, {(2, 0): 1.0, (0, 2): -1.0})
    assert p.degree() == 2 and p.is_homogeneous()
    assert not p.add_constant(1.0).is_homogeneous()


def test_partial_derivative():
    # d/dx1 (x1^3 + 3 x1 x2^2) = 3 x1^2 + 3 x2^2
    p = Polynomial(2, {(3, 0): 1.0, (1, 2): 3.0})
    expected = Polynomial(2, {(2, 0): 3.0, (0, 2): 3.0})
    assert p.partial(1).allclose(expected)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 31 - 1))
def test_arithmetic_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    p = _random_poly(rng, n, 3)
    q = _random_poly(rng, n, 2)
    x = rng.standard_normal(n)
    assert p.add(q).evaluate(x) == pytest.approx(p.evaluate(x) + q.evaluate(x))
    assert p.sub(q).evaluate(x) == pytest.approx(p.evaluate(x) - q.evaluate(x))
    assert p.mul(q).evaluate(x) == pytest.approx(
        p.evaluate(x) * q.evaluate(x), rel=1e-9, abs=1e-9)
    assert p.scale(2.5).evaluate(x) == pytest.approx(2.5 * p.evaluate(x))


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    p = _random_poly(rng, n, 3)
    x = rng.standard_normal(n)
    h = 1e-6
    g = p.eval_gradient(x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fd = (p.evaluate(x + e) - p.evaluate(x - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-4)


def test_operator_sugar():
    p = Polynomial(2, {(1, 0): 1.0})
    q = Polynomial(2, {(0, 1): 1.0})
    r = 2.0 * p + q * q - p
    assert r.allclose(Polynomial(2, {(1, 0): 1.0, (0, 2): 1.0}))
    assert (-p).allclose(p.scale(-1.0))


def test_pow():
    p = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
    assert p.pow(0).allclose(Polynomial.constant(2, 1.0))
    assert p.pow(2).allclose(
        Polynomial(2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}))
    with pytest.raises(ValueError):
        p.pow(-1)


# ------------------------------------------------- the constraint system


def test_system_shape_and_base_order():
    A = SymmetricTensor(3, 4, {(4, 0, 0): 1.0, (0, 4, 0): 2.0, (0, 0, 4): 3.0})
    system = build_jacobian_system(A, b_tensor("z", 3))
    # 2n - 3 weighted-gradient minors plus the normalization itself
    assert len(system.equalities) == 2 * 3 - 2
    assert system.m == 4 and system.m_prime == 2
    assert system.base_order == max((4 + 2 - 1) // 2, (4 + 1) // 2, 1)
    assert system.f.allclose(A.as_polynomial())


def test_system_vanishes_at_eigenpairs():
    # diagonal quartic: e_i are eigenvectors, and so are the mixed
    # two-coordinate critical points
    A = SymmetricTensor(3, 4, {(4, 0, 0): 1.0, (0, 4, 0): 2.0, (0, 0, 4): 3.0})
    system = build_jacobian_system(A, b_tensor("z", 3))
    points = [np.array([1.0, 0.0, 0.0]),
              np.array([0.0, 1.0, 0.0]),
              # u1^2 = lam, 2 u2^2 = lam, |u| = 1  =>  lam = 2/3
              np.array([np.sqrt(2.0 / 3.0), np.sqrt(1.0 / 3.0), 0.0])]
    for u in points:
        for h in system.equalities:
            assert abs(h.evaluate(u)) < 1e-12


def test_system_rejects_dimension_mismatch():
    A = SymmetricTensor(3, 4, {(4, 0, 0): 1.0})
    with pytest.raises(ValueError):
        build_jacobian_system(A, b_tensor("z", 2))


def test_univariate_system_is_normalization_only():
    A = SymmetricTensor(1, 3, {(3,): 2.0})
    system = build_jacobian_system(A, b_tensor("z", 1))
    assert len(system.equalities) == 1
    assert system.equalities[0].allclose(system.g)
