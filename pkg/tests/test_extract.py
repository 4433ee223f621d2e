"""Flatness detection and atom recovery from synthetic moment sequences."""

import numpy as np
import pytest

from teneig.extract import (check_flatness, extract_atoms, support_candidates,
                            verify_eigenpair)
from teneig.moment import Tms
from teneig.tensor_core import SymmetricTensor, b_tensor


def _separated_atoms(rng: np.random.Generator, n: int, ell: int,
                     min_gap: float = 0.1) -> list[np.ndarray]:
    """Rejection-sample ``ell`` points in the unit ball pairwise >= min_gap apart."""
    atoms: list[np.ndarray] = []
    while len(atoms) < ell:
        p = rng.uniform(-1.0, 1.0, size=n)
        if all(np.linalg.norm(p - q) >= min_gap for q in atoms):
            atoms.append(p)
    return atoms


def _match(recovered, truth, tol: float) -> bool:
    """Greedy one-to-one matching of recovered points to the truth set."""
    left = [np.asarray(t) for t in truth]
    for r in recovered:
        dists = [float(np.max(np.abs(r - t))) for t in left]
        k = int(np.argmin(dists))
        if dists[k] > tol:
            return False
        left.pop(k)
    return not left


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_atom_mixtures_flagged_flat_and_recovered(n, ell):
    for seed in range(5):
        rng = np.random.default_rng(1000 * n + 10 * ell + seed)
        atoms = _separated_atoms(rng, n, ell)
        weights = rng.uniform(0.2, 1.0, size=ell)
        tms = Tms.from_atoms(n, 3, atoms, weights)
        report = check_flatness(tms, window=1)
        assert report.satisfied, f"mixture not flagged flat (seed {seed})"
        assert report.ell == ell
        out = extract_atoms(tms, report.t, report.ell)
        assert len(out) == ell
        assert _match(out, atoms, 1e-6), f"atoms not recovered (seed {seed})"


def test_flatness_requires_rank_plateau():
    # degree-3 moments of a continuous measure never plateau at full window
    rng = np.random.default_rng(7)
    atoms = [rng.uniform(-1, 1, size=2) for _ in range(12)]
    tms = Tms.from_atoms(2, 2, atoms, np.ones(12))
    report = check_flatness(tms, window=1)
    assert not report.satisfied
    assert report.ranks  # the rank pattern is still reported


def test_flatness_window_two():
    atoms = [np.array([0.5, -0.25]), np.array([-0.75, 0.5])]
    tms = Tms.from_atoms(2, 4, atoms, [1.0, 2.0])
    report = check_flatness(tms, window=2)
    assert report.satisfied
    assert report.ell == 2
    out = extract_atoms(tms, report.t, report.ell)
    assert _match(out, atoms, 1e-8)


def test_extract_clusters_duplicate_atoms():
    a = np.array([0.3, 0.4])
    tms = Tms.from_atoms(2, 3, [a, a + 1e-9], [1.0, 1.0])
    report = check_flatness(tms, window=1)
    assert report.ell == 1
    out = extract_atoms(tms, report.t, report.ell)
    assert len(out) == 1
    assert np.max(np.abs(out[0] - a)) <= 1e-6


def test_support_candidates_single_atom():
    a = np.array([0.6, -0.8, 0.1])
    tms = Tms.from_atoms(3, 2, [a], [2.5])
    cands = support_candidates(tms)
    assert cands, "no candidates from a concentrated sequence"
    assert np.max(np.abs(cands[0] - a)) <= 1e-8


def test_support_candidates_axes_cover_two_atoms():
    # symmetric pair +/- a: the mean vanishes but the principal axis finds a
    a = np.array([0.7, 0.3])
    tms = Tms.from_atoms(2, 2, [a, -a], [1.0, 1.0])
    cands = support_candidates(tms)
    hits = [c for c in cands
            if min(np.linalg.norm(c - a), np.linalg.norm(c + a)) <= 1e-8]
    assert hits


def test_support_candidates_empty_for_zero_mass():
    tms = Tms(2, 2, np.zeros(len(Tms.from_atoms(2, 2, [[0.0, 0.0]], [1.0]).values)))
    assert support_candidates(tms) == []


def test_verify_eigenpair_polishes_perturbed_pair():
    A = SymmetricTensor.from_entry_classes(3, 4, {(1, 1, 1, 1): 2.0,
                                                  (2, 2, 2, 2): 3.0,
                                                  (3, 3, 3, 3): 1.0})
    B = b_tensor("z", 3, 4)
    u0 = np.array([0.0, 1.0, 0.0]) + 1e-4 * np.array([1.0, -2.0, 0.5])
    u, lam, res, ok = verify_eigenpair(A, B, u0, 3.0 + 1e-3)
    assert ok
    assert res <= 1e-6
    assert lam == pytest.approx(3.0, abs=1e-9)
    assert np.max(np.abs(np.abs(u) - [0.0, 1.0, 0.0])) <= 1e-7


def test_verify_eigenpair_rejects_non_eigenvector():
    A = SymmetricTensor.from_entry_classes(2, 3, {(1, 1, 1): 1.0,
                                                  (1, 2, 2): 0.5})
    B = b_tensor("z", 2, 3)
    u = np.array([2.0, 1.0])  # far from any normalized eigenvector
    _, _, res, ok = verify_eigenpair(A, B, u, 100.0, max_iter=0)
    assert not ok
    assert res > 1e-6
