"""Conic solver contract: duality, determinism, certificates."""

import numpy as np
import pytest

from teneig.moment import compile_relaxation
from teneig.poly import ConstraintSystem, Polynomial
from teneig.sdp import rank_of_psd, solve


def _unit_circle() -> ConstraintSystem:
    g = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    return ConstraintSystem(n=2, m=2, m_prime=2,
                            f=Polynomial(2, {(1, 0): 1.0}), g=g,
                            equalities=(g,))


def _free_plane() -> ConstraintSystem:
    return ConstraintSystem(n=2, m=2, m_prime=2,
                            f=Polynomial(2, {(1, 0): 1.0}),
                            g=Polynomial.zero(2), equalities=())


X1 = Polynomial(2, {(1, 0): 1.0})
X2 = Polynomial(2, {(0, 1): 1.0})


def test_rank_of_psd():
    M = np.diag([1.0, 1e-3, 1e-9])
    assert rank_of_psd(M) == 2
    assert rank_of_psd(np.zeros((3, 3))) == 0
    assert rank_of_psd(np.zeros((0, 0))) == 0


def test_linear_objective_on_circle_weak_duality():
    problem = compile_relaxation(_unit_circle(), 2, X1, "max")
    sol = solve(problem)
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-7)
    gap = abs(sol.primal_objective - sol.dual_objective)
    assert gap <= 1e-8 * (1.0 + abs(sol.primal_objective))
    # the optimal moment vector is the Dirac at (1, 0)
    tms = problem.tms(sol.y)
    M1 = tms.moment_matrix(1)
    assert M1[1, 0] == pytest.approx(1.0, abs=1e-6)
    assert M1[2, 0] == pytest.approx(0.0, abs=1e-6)


def test_quadratic_objective_with_inequality():
    # max x2^2 on the circle cut to {x1 >= 1/2}: optimum 3/4
    half_plane = X1.add_constant(-0.5)
    problem = compile_relaxation(_unit_circle(), 2,
                                 Polynomial(2, {(0, 2): 1.0}), "max",
                                 inequalities=(half_plane,))
    sol = solve(problem)
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(0.75, abs=1e-6)


def test_deterministic_resolve():
    problem = compile_relaxation(_unit_circle(), 3, X1.add(X2), "max")
    a = solve(problem)
    b = solve(problem)
    assert a.status == b.status == "optimal"
    assert abs(a.primal_objective - b.primal_objective) <= 1e-9
    assert np.max(np.abs(a.y - b.y)) <= 1e-9


def test_infeasible_band_yields_verified_certificate():
    # the circle does not reach x1 >= 2
    problem = compile_relaxation(_unit_circle(), 2, X1, "max",
                                 inequalities=(X1.add_constant(-2.0),))
    sol = solve(problem)
    assert sol.status == "infeasible"
    cert = sol.certificate
    assert cert["kind"] == "moment_infeasibility"
    # the certificate's improving-ray blocks must be PSD up to round-off
    scale = max(float(np.abs(R).max()) for R in cert["ray_blocks"])
    for R in cert["ray_blocks"]:
        assert float(np.linalg.eigvalsh(R)[0]) >= -1e-7 * max(scale, 1.0)
    # the separating value must dominate the equality null residual, the
    # same margin the solver itself insists on before reporting infeasible
    assert cert["value_at_feasible_point"] < 0
    assert (cert["value_at_feasible_point"]
            <= -100.0 * cert["equality_null_residual"])
    # evaluating the lifted functional at moment vectors of actual feasible
    # points of the equality system must stay on the separating side
    w = np.asarray(cert["functional"])
    from teneig.moment import dirac_moments
    for theta in np.linspace(0.0, 2 * np.pi, 17):
        y_feas = dirac_moments(2, problem.order,
                               [np.cos(theta), np.sin(theta)])
        assert float(w @ y_feas) <= 0.5 * cert["value_at_feasible_point"]


def test_unbounded_moment_problem_returns_ray():
    problem = compile_relaxation(_free_plane(), 1, X1, "max")
    sol = solve(problem)
    assert sol.status == "unbounded"
    cert = sol.certificate
    assert cert["kind"] == "unbounded_ray"
    assert cert["objective_rate"] > 0
    # pushing along the ray must keep every block PSD
    assert all(v >= -1e-7 for v in cert["block_min_eigs"])


def test_inconsistent_equalities_detected():
    g = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): 1.0})  # |x|^2 = -1
    system = ConstraintSystem(n=2, m=2, m_prime=2, f=X1, g=g, equalities=(g,))
    problem = compile_relaxation(system, 2, X1, "max")
    sol = solve(problem)
    assert sol.status == "infeasible"


def test_solution_residuals_reported():
    problem = compile_relaxation(_unit_circle(), 2, X1, "max")
    sol = solve(problem)
    assert sol.iterations > 0
    assert {"primal", "dual", "gap"} <= set(sol.residuals)
    assert sol.residuals["gap"] <= 1e-7
