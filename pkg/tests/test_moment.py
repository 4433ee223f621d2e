"""Moment/localizing block assembly against hand-written references."""

import numpy as np
import pytest

from teneig.moment import (MonomialBasis, Tms, basis_size, compile_relaxation,
                           dirac_moments, equality_rows, localizing_block)
from teneig.poly import ConstraintSystem, Polynomial


def test_basis_is_graded_lexicographic():
    basis = MonomialBasis(2, 2)
    assert basis.exponents == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(basis) == basis_size(2, 2) == 6
    assert basis.index((1, 1)) == 4
    with pytest.raises(KeyError):
        basis.index((3, 0))


def test_nested_bases_are_prefixes():
    small = MonomialBasis(3, 2)
    big = MonomialBasis(3, 4)
    assert big.exponents[:len(small)] == small.exponents


def test_moment_matrix_layout_bivariate_order_two():
    """The 6x6 degree-2 moment matrix, cell for cell."""
    block = localizing_block("moment", Polynomial.constant(2, 1.0), 2, 2)
    assert block.side == 6
    rows = MonomialBasis(2, 2).exponents

    def y(a, b):  # exponents written as digit pairs, e.g. y(2, 1) ~ y_21
        return {(a, b): 1.0}

    expected = [
        [y(0, 0), y(1, 0), y(0, 1), y(2, 0), y(1, 1), y(0, 2)],
        [y(1, 0), y(2, 0), y(1, 1), y(3, 0), y(2, 1), y(1, 2)],
        [y(0, 1), y(1, 1), y(0, 2), y(2, 1), y(1, 2), y(0, 3)],
        [y(2, 0), y(3, 0), y(2, 1), y(4, 0), y(3, 1), y(2, 2)],
        [y(1, 1), y(2, 1), y(1, 2), y(3, 1), y(2, 2), y(1, 3)],
        [y(0, 2), y(1, 2), y(0, 3), y(2, 2), y(1, 3), y(0, 4)],
    ]
    for i in range(6):
        for j in range(6):
            assert block.cell_form(i, j) == expected[i][j], (i, j, rows[i], rows[j])


def test_localizing_matrix_unit_disc_order_two():
    """The 3x3 localizing matrix of 1 - x1^2 - x2^2 at order 2."""
    q = Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    block = localizing_block("disc", q, 2, 2)
    assert block.side == 3  # rows indexed by 1, x1, x2

    def cell(a, b):
        return {(a, b): 1.0, (a + 2, b): -1.0, (a, b + 2): -1.0}

    expected = [
        [cell(0, 0), cell(1, 0), cell(0, 1)],
        [cell(1, 0), cell(2, 0), cell(1, 1)],
        [cell(0, 1), cell(1, 1), cell(0, 2)],
    ]
    for i in range(3):
        for j in range(3):
            assert block.cell_form(i, j) == expected[i][j], (i, j)


def test_localizing_block_rejects_overdeep_polynomials():
    q = Polynomial(2, {(5, 0): 1.0})
    with pytest.raises(ValueError):
        localizing_block("q", q, 2, 2)


def test_blocks_evaluate_consistently_on_dirac_moments():
    # at a Dirac measure the assembled block is q(u) * v(u) v(u)^T
    u = np.array([0.3, -0.7])
    q = Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    y = dirac_moments(2, 2, u)
    block = localizing_block("disc", q, 2, 2)
    M = block.assemble(y)
    v = np.array([1.0, u[0], u[1]])
    assert np.allclose(M, q.evaluate(u) * np.outer(v, v), atol=1e-12)


def test_linear_operator_matches_assemble():
    q = Polynomial(2, {(1, 0): 1.0, (0, 1): -2.0})
    block = localizing_block("q", q, 2, 2)
    rng = np.random.default_rng(0)
    y = rng.standard_normal(basis_size(2, 4))
    M = block.assemble(y)
    vec = block.linear_operator() @ y
    assert np.allclose(vec.reshape(block.side, block.side), M, atol=1e-12)


def test_equality_rows_deduplicate_by_shift_monomial():
    q = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    rows = equality_rows(q, 2, 2)
    # one row per shift monomial of degree <= 2*(2 - 1) = 2
    assert len(rows) == basis_size(2, 2)
    basis = MonomialBasis(2, 4)
    # the row for shift x1 x2 reads y_31 + y_13 - y_11 = 0
    row = rows[basis_size(2, 1) + 1]  # shifts are ordered like the basis
    named = {basis.exponents[k]: c for k, c in row.items()}
    assert named == {(3, 1): 1.0, (1, 3): 1.0, (1, 1): -1.0}


def _circle_system() -> ConstraintSystem:
    g = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    return ConstraintSystem(n=2, m=2, m_prime=2,
                            f=Polynomial(2, {(1, 0): 1.0}), g=g,
                            equalities=(g,))


def test_compile_relaxation_structure():
    system = _circle_system()
    objective = Polynomial(2, {(1, 0): 1.0})
    problem = compile_relaxation(system, 2, objective, "max")
    assert problem.num_moments == basis_size(2, 4)
    assert problem.eq_labels[0] == "mass"
    assert problem.eq_rhs[0] == 1.0 and np.all(problem.eq_rhs[1:] == 0.0)
    assert [b.label for b in problem.blocks] == ["moment"]
    ineq = Polynomial(2, {(1, 0): 1.0})
    with_ineq = compile_relaxation(system, 2, objective, "min",
                                   inequalities=(ineq,))
    assert [b.label for b in with_ineq.blocks] == ["moment", "ineq1"]
    # describe() must render without touching the solver
    assert "moment relaxation" in with_ineq.describe()


def test_compile_relaxation_validates():
    system = _circle_system()
    objective = Polynomial(2, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        compile_relaxation(system, 2, objective, "upward")
    with pytest.raises(ValueError):
        compile_relaxation(system, 0, objective, "max")
    with pytest.raises(ValueError):
        compile_relaxation(system, 2, Polynomial(2, {(5, 0): 1.0}), "max")


def test_tms_from_atoms_and_moment_matrix_psd():
    atoms = [np.array([1.0, 0.0]), np.array([0.0, -1.0])]
    tms = Tms.from_atoms(2, 2, atoms, weights=[0.25, 0.75])
    M = tms.moment_matrix(2)
    assert np.all(np.linalg.eigvalsh(M) > -1e-12)
    assert tms.values[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tms.moment_matrix(3)
