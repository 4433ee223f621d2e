"""Symmetric tensor storage, contraction, normalizing tensors, file IO."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teneig.tensor_core import (SymmetricTensor, b_tensor, dump_tensor_json,
                                load_tensor, load_tensor_json,
                                load_tensor_text)


def test_coefficient_constructor_validates():
    with pytest.raises(ValueError):
        SymmetricTensor(2, 3, {(1, 1): 1.0})      # degree 2 != order 3
    with pytest.raises(ValueError):
        SymmetricTensor(2, 3, {(3, 0, 0): 1.0})   # wrong exponent length
    with pytest.raises(ValueError):
        SymmetricTensor(0, 2)


def test_entry_and_coefficient_views_agree():
    # A x^3 = 6 x1 x2 x3 puts entry 1 on every permutation of (1,2,3)
    A = SymmetricTensor(3, 3, {(1, 1, 1): 6.0})
    assert A.entry((1, 2, 3)) == pytest.approx(1.0)
    assert A.entry((3, 1, 2)) == pytest.approx(1.0)
    assert A.entry((1, 1, 2)) == 0.0


def test_from_entries_accumulates_raw_values():
    A = SymmetricTensor.from_entries(2, 2, {(1, 2): 1.0, (2, 1): 1.0})
    # both off-diagonal slots filled: form = 2 x1 x2
    assert A.coeffs == {(1, 1): 2.0}
    assert A.as_matrix()[0, 1] == pytest.approx(1.0)


def test_from_entry_classes_weights_by_orbit():
    A = SymmetricTensor.from_entry_classes(2, 3, {(1, 1, 2): 2.0})
    # class (1,1,2) has 3 orderings: coefficient of x1^2 x2 is 6
    assert A.coeffs == {(2, 1): 6.0}
    assert A.entry((1, 2, 1)) == pytest.approx(2.0)


def test_from_dense_symmetrizes():
    arr = np.zeros((2, 2, 2))
    arr[0, 0, 1] = 3.0   # asymmetric placement
    A = SymmetricTensor.from_dense(arr)
    assert A.entry((1, 1, 2)) == pytest.approx(1.0)
    B = SymmetricTensor.from_entry_classes(2, 3, {(1, 1, 2): 1.0})
    assert A.coeffs == pytest.approx(B.coeffs)


def test_from_dense_rejects_ragged():
    with pytest.raises(ValueError):
        SymmetricTensor.from_dense(np.zeros((2, 3)))


def test_from_polynomial_requires_homogeneous():
    from teneig.poly import Polynomial
    with pytest.raises(ValueError):
        SymmetricTensor.from_polynomial(
            Polynomial(2, {(2, 0): 1.0, (0, 0): 1.0}))


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 31 - 1))
def test_contraction_matches_dense_einsum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    m = int(rng.integers(2, 5))
    raw = rng.standard_normal((n,) * m)
    sym = np.zeros_like(raw)
    for perm in itertools.permutations(range(m)):
        sym += np.transpose(raw, perm)
    sym /= float(math.factorial(m))
    A = SymmetricTensor.from_dense(sym)
    u = rng.standard_normal(n)
    dense = sym
    for _ in range(m - 1):
        dense = np.tensordot(dense, u, axes=(0, 0))
    assert np.allclose(A.apply(u), dense, atol=1e-10 * (1 + np.abs(dense).max()))
    full = float(np.dot(dense, u))
    assert A.form_value(u) == pytest.approx(full, rel=1e-10, abs=1e-10)


def test_scaling_and_negation():
    A = SymmetricTensor(2, 2, {(2, 0): 1.0, (0, 2): 4.0})
    assert (2.0 * A).form_value([1.0, 1.0]) == pytest.approx(10.0)
    assert (-A).form_value([1.0, 0.0]) == pytest.approx(-1.0)


# ----------------------------------------------------- normalizing tensors


def test_b_tensor_z_is_unit_sphere():
    B = b_tensor("z", 3)
    assert B.m == 2
    assert B.form_value([1.0, 2.0, 2.0]) == pytest.approx(9.0)


def test_b_tensor_h_matches_power_sum():
    B = b_tensor("h", 2, m=4)
    assert B.form_value([2.0, 1.0]) == pytest.approx(17.0)
    with pytest.raises(ValueError):
        b_tensor("h", 2)


def test_b_tensor_d_quadratic_form():
    D = np.array([[2.0, 0.5], [0.5, 1.0]])
    B = b_tensor("d", 2, matrix=D)
    x = np.array([1.0, 3.0])
    assert B.form_value(x) == pytest.approx(float(x @ D @ x))
    assert np.allclose(B.as_matrix(), D)


def test_b_tensor_d_rejects_bad_matrices():
    with pytest.raises(ValueError):
        b_tensor("d", 2, matrix=np.array([[1.0, 2.0], [0.0, 1.0]]))  # asymmetric
    with pytest.raises(ValueError):
        b_tensor("d", 2, matrix=np.array([[1.0, 0.0], [0.0, -1.0]]))  # indefinite
    with pytest.raises(ValueError):
        b_tensor("w", 2)


# ------------------------------------------------------------------ file IO


def test_text_format_round_trip():
    text = """
    # diagonal quartic
    3 4
    1 1 1 1   1.0
    2 2 2 2   2.0
    3 3 3 3   3.0
    """
    A = load_tensor_text(text)
    assert A.n == 3 and A.m == 4
    assert A.form_value([1.0, 1.0, 1.0]) == pytest.approx(6.0)


def test_text_format_errors():
    with pytest.raises(ValueError):
        load_tensor_text("")
    with pytest.raises(ValueError):
        load_tensor_text("2\n")
    with pytest.raises(ValueError):
        load_tensor_text("2 2\n1 1\n")  # missing value


def test_json_round_trip_exact():
    A = SymmetricTensor.from_entry_classes(
        3, 3, {(1, 1, 2): 0.5, (1, 2, 3): -1.25, (3, 3, 3): 2.0})
    B = load_tensor_json(dump_tensor_json(A))
    assert B.n == A.n and B.m == A.m
    assert B.coeffs == A.coeffs


def test_json_malformed():
    with pytest.raises(ValueError):
        load_tensor_json('{"n": 2}')


def test_load_tensor_sniffs_format(tmp_path):
    A = SymmetricTensor(2, 2, {(2, 0): 1.0, (0, 2): 2.0})
    jpath = tmp_path / "t.json"
    jpath.write_text(dump_tensor_json(A))
    tpath = tmp_path / "t.txt"
    tpath.write_text("2 2\n1 1 1.0\n2 2 2.0\n")
    for path in (jpath, tpath):
        T = load_tensor(str(path))
        assert T.coeffs == A.coeffs
