"""Flat-truncation detection, atom extraction, and eigenpair verification.

A truncated moment sequence is *flat* when the rank of its degree-``t``
moment matrix stalls across a fixed degree window; the sequence is then the
moment vector of a measure supported on ``rank`` points, and those support
atoms are recovered by simultaneous diagonalization of multiplication
operators on the column space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .moment import MonomialBasis, Tms, basis_size
from .sdp import rank_of_psd


@dataclass
class FlatnessReport:
    """Rank pattern of the nested moment matrices of one solution.

    ``satisfied`` means some degree ``t`` (the smallest is reported) has
    ``rank M_{t - window} == rank M_t``; ``ell`` is that shared rank.
    """

    satisfied: bool
    t: int | None = None
    ell: int | None = None
    window: int = 1
    ranks: dict[int, int] = field(default_factory=dict)


def check_flatness(tms: Tms, window: int, rank_tol: float = 1e-6) -> FlatnessReport:
    """Scan degrees ``window <= t <= order`` for a rank plateau.

    ``window`` is half the degree of the deepest constraint polynomial,
    rounded up (the relaxation's base order).
    """
    N = tms.order
    M_full = tms.moment_matrix(N)
    ranks: dict[int, int] = {}
    for s in range(N + 1):
        side = basis_size(tms.n, s)
        ranks[s] = rank_of_psd(M_full[:side, :side], rank_tol)
    for t in range(window, N + 1):
        if ranks[t - window] == ranks[t]:
            return FlatnessReport(satisfied=True, t=t, ell=ranks[t],
                                  window=window, ranks=ranks)
    return FlatnessReport(satisfied=False, window=window, ranks=ranks)


def _column_echelon_pivots(V: np.ndarray, ell: int, tol: float):
    """Row-reduce ``V^T`` picking pivot columns greedily in basis order.

    Returns (pivot positions, reduced matrix R) with ``R[k, pivot_j] = delta_kj``;
    row ``k`` of ``R`` expresses monomial ``pivot_k``'s dual basis functional.
    """
    R = V.T.copy()
    nrow, ncol = R.shape
    scale = np.max(np.abs(R), initial=0.0)
    if scale == 0.0:
        return None, None
    pivots: list[int] = []
    r = 0
    for c in range(ncol):
        if r >= ell:
            break
        lead = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[lead, c]) <= tol * scale:
            continue
        R[[r, lead]] = R[[lead, r]]
        R[r] = R[r] / R[r, c]
        mask = np.arange(nrow) != r
        R[mask] = R[mask] - np.outer(R[mask, c], R[r])
        pivots.append(c)
        r += 1
    if r < ell:
        return None, None
    return pivots, R


def extract_atoms(tms: Tms, t: int, ell: int, rank_tol: float = 1e-6,
                  seed: int = 0, cluster_tol: float = 1e-6):
    """Recover the ``ell`` support atoms of a flat moment sequence.

    Takes the dominant rank-``ell`` factor of the degree-``t`` moment matrix,
    column-reduces it to find a monomial basis of the quotient space, forms
    the multiplication-by-``x_i`` matrices, and reads the atoms off a real
    Schur decomposition of a random (seeded) convex combination.  Returns a
    list of distinct atom vectors, or ``None`` when the numerics refuse
    (non-real Schur blocks, rank mismatch) -- the caller falls back to the
    degenerate-recovery path.
    """
    n = tms.n
    if t < 1:
        return None
    M = tms.moment_matrix(t)
    evals, evecs = np.linalg.eigh(M)
    order = np.argsort(evals)[::-1]
    lead = evals[order[:ell]]
    if lead[-1] <= rank_tol * max(1.0, lead[0]) * 1e-3 or lead[-1] <= 0:
        return None
    V = evecs[:, order[:ell]] * np.sqrt(lead)

    pivots, R = _column_echelon_pivots(V, ell, tol=1e-8)
    if pivots is None:
        return None
    basis_t = MonomialBasis(n, t)
    pivot_exps = [basis_t.exponents[c] for c in pivots]
    if any(sum(e) >= t for e in pivot_exps):
        # multiplication would need monomials beyond degree t
        return None

    mult = []
    for i in range(n):
        Ni = np.empty((ell, ell))
        for col, beta in enumerate(pivot_exps):
            shifted = list(beta)
            shifted[i] += 1
            Ni[:, col] = R[:, basis_t.index(tuple(shifted))]
        mult.append(Ni)

    rng = np.random.default_rng(seed)
    for _ in range(4):
        c = rng.standard_normal(n)
        c /= np.linalg.norm(c)
        N = sum(ci * Ni for ci, Ni in zip(c, mult))
        T, Qs = sla.schur(N, output="real")
        off = np.diag(T, -1)
        if off.size and np.max(np.abs(off)) > 1e-7 * max(1.0, np.max(np.abs(T))):
            continue  # complex eigenvalues: retry with a fresh combination
        atoms = []
        for k in range(ell):
            q = Qs[:, k]
            atoms.append(np.array([q @ Ni @ q for Ni in mult]))
        return _cluster(atoms, cluster_tol)
    return None


def _cluster(atoms, tol: float):
    """Merge atoms closer than ``tol`` in the max norm."""
    out: list[np.ndarray] = []
    for a in atoms:
        for b in out:
            if np.max(np.abs(a - b)) <= tol:
                break
        else:
            out.append(a)
    return out


def support_candidates(tms: Tms) -> list[np.ndarray]:
    """Cheap support-point guesses from the degree-two moments.

    A sequence that is not flat can still be concentrated near its support:
    the mass-normalized mean and the principal axes of the second-moment
    block are then natural seeds for local refinement.  The guesses carry no
    certificate -- callers must verify whatever they polish into.
    """
    M1 = tms.moment_matrix(1)
    y0 = float(M1[0, 0])
    if not np.isfinite(y0) or y0 <= 1e-12:
        return []
    mean = M1[1:, 0] / y0
    second = M1[1:, 1:] / y0
    vals, vecs = np.linalg.eigh(second)
    top = float(vals[-1]) if vals.size else 0.0
    out = [mean]
    if top <= 0:
        return out
    for i in range(vals.size - 1, -1, -1):
        if vals[i] < 1e-3 * top:
            break
        axis = float(np.sqrt(max(vals[i], 0.0))) * vecs[:, i]
        out.append(axis)
        out.append(-axis)
    return out


def verify_eigenpair(A, B, u, lam: float, residual_tol: float = 1e-6,
                     max_iter: int = 50):
    """Square-system residual check with Newton polish.

    Solves ``F(u, lam) = (A u^{m-1} - lam * B u^{m'-1}, B u^{m'} - 1) = 0``
    by damped least-squares Newton from the given point, at most ``max_iter``
    steps, and returns ``(u, lam, residual, ok)`` for the best iterate seen.
    The residual is the max norm of ``F``.  The iteration budget is generous
    because eigenpairs with a rank-deficient Jacobian (isolated but
    higher-order zeros) reduce the convergence rate to linear.
    """
    n = A.n
    m, mp = A.m, B.m
    u = np.asarray(u, dtype=float).copy()
    lam = float(lam)

    def residual_vec(u, lam):
        top = A.apply(u) - lam * B.apply(u)
        bottom = B.form_value(u) - 1.0
        return np.concatenate([top, [bottom]])

    def jacobian(u, lam):
        J = np.zeros((n + 1, n + 1))
        Am2 = (m - 1) * A.contract(u, m - 2).as_matrix() if m >= 2 else np.zeros((n, n))
        Bm2 = (mp - 1) * B.contract(u, mp - 2).as_matrix() if mp >= 2 else np.zeros((n, n))
        Bu = B.apply(u)
        J[:n, :n] = Am2 - lam * Bm2
        J[:n, n] = -Bu
        J[n, :n] = mp * Bu
        return J

    best_u, best_lam = u.copy(), lam
    best_res = float(np.max(np.abs(residual_vec(u, lam))))
    for _ in range(max_iter):
        F = residual_vec(u, lam)
        res = float(np.max(np.abs(F)))
        if res < best_res:
            best_u, best_lam, best_res = u.copy(), lam, res
        if res <= 1e-14 * (1.0 + abs(lam)):
            break
        J = jacobian(u, lam)
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        # damped update: halve until the residual does not blow up
        scale = 1.0
        for _ in range(6):
            u_new = u + scale * step[:n]
            lam_new = lam + scale * step[n]
            if np.max(np.abs(residual_vec(u_new, lam_new))) <= max(res, 1e-30) * (1.0 + 1e-8):
                break
            scale *= 0.5
        u = u + scale * step[:n]
        lam = lam + scale * step[n]
    final = float(np.max(np.abs(residual_vec(u, lam))))
    if final < best_res:
        best_u, best_lam, best_res = u, lam, final
    return best_u, float(best_lam), best_res, best_res <= residual_tol
