"""Independent ground-truth spectra used by the test suite and the CLI.

Three generators of increasing generality, none of which share code with the
moment-relaxation pipeline:

- :func:`diagonal_z_spectrum` — closed-form spectrum of a diagonal tensor on
  the unit sphere.
- :func:`circle_scan` — dense parametric scan of the unit circle for n = 2.
- :func:`newton_multistart` — damped Newton from many random starts; finds a
  subset of the spectrum with high probability, never a certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .extract import verify_eigenpair
from .poly import Polynomial
from .tensor_core import SymmetricTensor, b_tensor

__all__ = [
    "OracleSpectrum",
    "diagonal_z_spectrum",
    "circle_scan",
    "newton_multistart",
]


@dataclass(frozen=True)
class OracleSpectrum:
    """A reference spectrum: strictly decreasing eigenvalues, the generator
    that produced them, and the accuracy it vouches for."""

    eigenvalues: tuple[float, ...]
    source: str
    tolerance: float
    multiplicities: tuple[int, ...] | None = None

    def __post_init__(self):
        eigs = self.eigenvalues
        for a, b in zip(eigs, eigs[1:]):
            if not a > b:
                raise ValueError("oracle eigenvalues must strictly decrease")


def _merge(values, tol: float):
    """Collapse (value, count) pairs whose values coincide within tol,
    summing counts; returns lists sorted by decreasing value."""
    out: list[list[float]] = []
    for lam, count in sorted(values, key=lambda t: -t[0]):
        if out and abs(out[-1][0] - lam) <= tol * (1.0 + abs(lam)):
            out[-1][1] += count
        else:
            out.append([lam, count])
    return [v for v, _ in out], [int(c) for _, c in out]


def diagonal_z_spectrum(a, m: int = 4) -> OracleSpectrum:
    """All Z-eigenvalues of the diagonal tensor with form sum_i a_i * x_i^m.

    For even m and positive weights, every eigenvector is supported on a
    subset S of the coordinates with u_i^(m-2) = lam / a_i there, which
    pins lam = (sum_{i in S} a_i^(-2/(m-2)))^(-(m-2)/2); for m = 4 this is
    the harmonic-style form 1 / sum_{i in S} (1/a_i).  Each support yields
    2^(|S|-1) eigenvectors modulo global sign.
    """
    a = [float(x) for x in a]
    if m < 2 or m % 2 != 0:
        raise ValueError("closed form requires an even order m >= 2")
    if any(x <= 0 for x in a):
        raise ValueError("closed form requires strictly positive weights")
    n = len(a)
    if n < 1:
        raise ValueError("need at least one weight")
    p = 2.0 / (m - 2) if m > 2 else None
    values: list[tuple[float, int]] = []
    for size in range(1, n + 1):
        for S in itertools.combinations(range(n), size):
            if m == 2:
                if size > 1:
                    continue
                lam = a[S[0]]
            else:
                lam = float(sum(a[i] ** (-p) for i in S) ** (-1.0 / p))
            values.append((lam, 2 ** (size - 1)))
    eigs, mults = _merge(values, 1e-12)
    return OracleSpectrum(eigenvalues=tuple(eigs), source="analytic_diagonal",
                          tolerance=1e-12, multiplicities=tuple(mults))


def _eval_on_circle(p: Polynomial, C: np.ndarray, S: np.ndarray) -> np.ndarray:
    out = np.zeros_like(C)
    for (i, j), coeff in p.terms.items():
        out += coeff * C**i * S**j
    return out


def circle_scan(f: Polynomial, grid: int = 100_000) -> OracleSpectrum:
    """Critical values of a bivariate form on the unit circle.

    Parametrizes the circle, locates sign changes of the angular derivative
    on a uniform grid (central differences), and polishes each bracket with
    a root finder to ~1e-12.  Scanning the full circle reports both members
    of a (lam, u) / (-lam, -u) pair for odd-degree forms, matching the
    solver's reporting convention; for even degrees duplicates collapse.
    """
    if f.n != 2:
        raise ValueError("circle_scan needs a polynomial in two variables")
    if grid < 8:
        raise ValueError("grid too coarse")
    fx, fy = f.partial(1), f.partial(2)

    def dphi(theta: float) -> float:
        c, s = np.cos(theta), np.sin(theta)
        return float(-s * fx.evaluate((c, s)) + c * fy.evaluate((c, s)))

    theta = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    C, S = np.cos(theta), np.sin(theta)
    phi = _eval_on_circle(f, C, S)
    # central-difference angular derivative, wrapping around the circle
    d = np.roll(phi, -1) - np.roll(phi, 1)
    scale = max(float(np.max(np.abs(phi))), 1.0)
    if float(np.max(np.abs(d))) <= 1e-14 * scale:
        # rotationally invariant form: a single critical value
        lam = float(phi[0])
        return OracleSpectrum(eigenvalues=(lam,), source="circle_scan",
                              tolerance=1e-12)
    step = theta[1] - theta[0]
    roots: list[float] = []
    for j in range(grid):
        jn = (j + 1) % grid
        if d[j] == 0.0:
            roots.append(float(theta[j]))
        elif d[j] * d[jn] < 0.0:
            lo, hi = float(theta[j]), float(theta[j] + step)
            flo, fhi = dphi(lo), dphi(hi)
            if flo == 0.0:
                continue  # already recorded as an exact node
            if flo * fhi > 0.0:  # smoothed sign change; widen once
                lo, hi = lo - step, hi + step
                flo, fhi = dphi(lo), dphi(hi)
                if flo * fhi > 0.0:
                    continue
            roots.append(float(brentq(dphi, lo, hi, xtol=1e-14)))
    values = [(float(f.evaluate((np.cos(t), np.sin(t)))), 1) for t in roots]
    eigs, _ = _merge(values, 1e-10)
    return OracleSpectrum(eigenvalues=tuple(eigs), source="circle_scan",
                          tolerance=1e-10)


def newton_multistart(A: SymmetricTensor, B: SymmetricTensor | None = None, *,
                      kind: str | None = None, starts: int = 2000,
                      seed: int = 0,
                      residual_tol: float = 1e-10) -> OracleSpectrum:
    """Eigenvalues found by damped Newton from random unit starts.

    Collects every converged eigenpair with residual at most residual_tol
    and deduplicates the eigenvalues.  The result is a likely subset of the
    true spectrum, useful for cross-checks; it is explicitly not complete.
    """
    if B is None:
        B = b_tensor(kind if kind is not None else "z", A.n, A.m)
    rng = np.random.default_rng(seed)
    f = A.as_polynomial()
    found: list[tuple[float, float]] = []
    for _ in range(starts):
        u = rng.standard_normal(A.n)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            continue
        u /= norm
        value = B.form_value(u)
        if abs(value) < 1e-12:
            continue
        if value < 0 and B.m % 2 == 0:
            continue  # no positive rescaling reaches the level set
        s = np.sign(value) * abs(value) ** (-1.0 / B.m)
        u = s * u
        lam0 = float(f.evaluate(u))
        _, lam, res, ok = verify_eigenpair(A, B, u, lam0,
                                           residual_tol=residual_tol,
                                           max_iter=80)
        if ok:
            found.append((float(lam), 1))
    eigs, _ = _merge(found, 1e-6)
    return OracleSpectrum(eigenvalues=tuple(eigs), source="newton_multistart",
                          tolerance=1e-6)
