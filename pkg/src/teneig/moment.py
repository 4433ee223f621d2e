"""Assembly of truncated moment problems: bases, localizing blocks, equalities.

Monomials follow a graded order (degree first) with lexicographic order
inside each grade, ``x1`` highest.  Under this order the degree-``s`` moment
matrix is the leading principal submatrix of the degree-``N`` one, which the
flatness analysis relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .poly import Polynomial


def _compositions(total: int, parts: int):
    """Exponent tuples of weight ``total`` in descending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def basis_size(n: int, d: int) -> int:
    return math.comb(n + d, d)


class MonomialBasis:
    """All monomials of degree <= d in n variables, graded-lexicographic."""

    __slots__ = ("n", "d", "exponents", "_index")

    def __init__(self, n: int, d: int):
        self.n = int(n)
        self.d = int(d)
        self.exponents: list[tuple[int, ...]] = []
        for total in range(self.d + 1):
            self.exponents.extend(_compositions(total, self.n))
        self._index = {a: i for i, a in enumerate(self.exponents)}

    def __len__(self) -> int:
        return len(self.exponents)

    def index(self, alpha) -> int:
        key = tuple(int(e) for e in alpha)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"monomial {key} not in basis of degree {self.d}") from None

    def __contains__(self, alpha) -> bool:
        return tuple(int(e) for e in alpha) in self._index


@dataclass
class Tms:
    """A truncated moment sequence: values indexed by ``MonomialBasis(n, 2N)``."""

    n: int
    order: int                       # relaxation order N; degrees run to 2N
    values: np.ndarray
    basis: MonomialBasis = field(init=False, repr=False)

    def __post_init__(self):
        self.basis = MonomialBasis(self.n, 2 * self.order)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.basis),):
            raise ValueError(
                f"moment vector has length {self.values.shape}, "
                f"expected {len(self.basis)}")

    @classmethod
    def from_atoms(cls, n: int, order: int, atoms, weights=None) -> "Tms":
        """Moments of a finite atomic measure, mainly for tests and oracles."""
        atoms = [np.asarray(a, dtype=float) for a in atoms]
        if weights is None:
            weights = np.full(len(atoms), 1.0 / max(len(atoms), 1))
        weights = np.asarray(weights, dtype=float)
        basis = MonomialBasis(n, 2 * order)
        vals = np.zeros(len(basis))
        for w, u in zip(weights, atoms):
            vals += w * np.array([np.prod(u ** np.array(a)) for a in basis.exponents])
        return cls(n, order, vals)

    def moment_matrix(self, t: int) -> np.ndarray:
        """The degree-``t`` moment matrix of this sequence (needs t <= order)."""
        if t > self.order:
            raise ValueError(f"degree {t} exceeds relaxation order {self.order}")
        sub = MonomialBasis(self.n, t)
        side = len(sub)
        M = np.empty((side, side))
        for i, a in enumerate(sub.exponents):
            for j in range(i, side):
                b = sub.exponents[j]
                M[i, j] = M[j, i] = self.values[
                    self.basis.index(tuple(x + y for x, y in zip(a, b)))]
        return M


def dirac_moments(n: int, order: int, point) -> np.ndarray:
    """Moment vector of the unit mass at ``point`` up to degree ``2*order``."""
    return Tms.from_atoms(n, order, [point]).values


class AffineMatrixBlock:
    """A symmetric-matrix-valued map, linear in the moment vector.

    Cell ``(beta, gamma)`` of the block localizing a polynomial ``q`` is
    ``sum_alpha q_alpha * y[alpha + beta + gamma]``; the moment matrix itself
    is the special case ``q = 1``.
    """

    __slots__ = ("label", "side", "row_basis", "y_basis", "cells")

    def __init__(self, label: str, row_basis: MonomialBasis, y_basis: MonomialBasis,
                 q: Polynomial):
        self.label = label
        self.row_basis = row_basis
        self.y_basis = y_basis
        self.side = len(row_basis)
        # upper-triangle cells as {y index: coefficient}
        self.cells: dict[tuple[int, int], dict[int, float]] = {}
        for i, beta in enumerate(row_basis.exponents):
            for j in range(i, self.side):
                gamma = row_basis.exponents[j]
                form: dict[int, float] = {}
                for alpha, c in q.terms.items():
                    key = tuple(a + b + g for a, b, g in zip(alpha, beta, gamma))
                    yi = y_basis.index(key)
                    form[yi] = form.get(yi, 0.0) + c
                self.cells[(i, j)] = form

    def cell_form(self, i: int, j: int) -> dict[tuple[int, ...], float]:
        """Cell ``(i, j)`` as an exponent-keyed linear form (for inspection)."""
        if i > j:
            i, j = j, i
        return {self.y_basis.exponents[k]: c for k, c in self.cells[(i, j)].items()}

    def assemble(self, y: np.ndarray) -> np.ndarray:
        M = np.zeros((self.side, self.side))
        for (i, j), form in self.cells.items():
            v = sum(c * y[k] for k, c in form.items())
            M[i, j] = M[j, i] = v
        return M

    def linear_operator(self) -> sp.csr_matrix:
        """Sparse map from the moment vector to the vectorized (side^2) block."""
        rows, cols, data = [], [], []
        for (i, j), form in self.cells.items():
            for k, c in form.items():
                rows.append(i * self.side + j)
                cols.append(k)
                data.append(c)
                if i != j:
                    rows.append(j * self.side + i)
                    cols.append(k)
                    data.append(c)
        return sp.csr_matrix((data, (rows, cols)),
                             shape=(self.side * self.side, len(self.y_basis)))


def localizing_block(label: str, q: Polynomial, n: int, N: int,
                     y_basis: MonomialBasis | None = None) -> AffineMatrixBlock:
    """Localizing block of ``q`` at relaxation order ``N``.

    The row basis has degree ``floor((2N - deg q) / 2)``, so every cell stays
    inside the degree-``2N`` moment vector.
    """
    deg = q.degree()
    if deg > 2 * N:
        raise ValueError(f"degree {deg} polynomial does not fit at order {N}")
    t = (2 * N - deg) // 2
    if y_basis is None:
        y_basis = MonomialBasis(n, 2 * N)
    return AffineMatrixBlock(label, MonomialBasis(n, t), y_basis, q)


def equality_rows(q: Polynomial, n: int, N: int,
                  y_basis: MonomialBasis | None = None) -> list[dict[int, float]]:
    """Distinct rows of the constraint 'localizing block of q vanishes'.

    Cells ``(beta, gamma)`` with equal ``beta + gamma`` produce identical
    linear forms, so rows are deduplicated by that exact exponent key: one
    row per monomial ``beta + gamma`` reachable from the block's row basis.
    """
    deg = q.degree()
    if deg > 2 * N:
        raise ValueError(f"degree {deg} polynomial does not fit at order {N}")
    if y_basis is None:
        y_basis = MonomialBasis(n, 2 * N)
    t = (2 * N - deg) // 2
    rows = []
    for alpha_w in MonomialBasis(n, 2 * t).exponents:
        form: dict[int, float] = {}
        for alpha, c in q.terms.items():
            yi = y_basis.index(tuple(a + w for a, w in zip(alpha, alpha_w)))
            form[yi] = form.get(yi, 0.0) + c
        rows.append(form)
    return rows


@dataclass
class MomentProblem:
    """A compiled moment relaxation ready for the conic solver.

    maximize / minimize   <objective, y>
    subject to            eq_rows . y = eq_rhs        (y_0 = 1 first)
                          every block in ``blocks`` PSD at y.
    """

    n: int
    order: int
    basis: MonomialBasis
    sense: str
    objective: np.ndarray
    eq_rows: sp.csr_matrix
    eq_rhs: np.ndarray
    eq_labels: list[str]
    blocks: list[AffineMatrixBlock]

    @property
    def num_moments(self) -> int:
        return len(self.basis)

    def tms(self, y: np.ndarray) -> Tms:
        return Tms(self.n, self.order, y)

    def describe(self) -> str:
        """Human-readable dump of the assembled relaxation."""
        out = [
            f"moment relaxation: n={self.n} order={self.order} "
            f"sense={self.sense} moments={self.num_moments}",
            f"objective support: "
            f"{int(np.count_nonzero(self.objective))} monomials",
            f"equality rows: {self.eq_rows.shape[0]}",
        ]
        from collections import Counter
        for lbl, cnt in Counter(self.eq_labels).items():
            out.append(f"  {cnt:4d} rows from {lbl}")
        for blk in self.blocks:
            out.append(f"psd block '{blk.label}': side {blk.side}")
        out.append("basis (degree, exponents):")
        for a in self.basis.exponents:
            out.append(f"  {sum(a)}  {a}")
        return "\n".join(out)


def compile_relaxation(system, N: int, objective: Polynomial, sense: str = "max",
                       inequalities=()) -> MomentProblem:
    """Compile the order-``N`` relaxation of optimizing ``objective`` over the
    equality system, with optional localized inequality constraints.

    Rows appear in a fixed order: the mass normalization ``y_0 = 1`` first,
    then the rows of each equality polynomial in system order.  Blocks are
    the moment matrix followed by one localizing block per inequality.
    """
    n = system.n
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if N < system.base_order:
        raise ValueError(f"order {N} below the minimum {system.base_order}")
    if objective.degree() > 2 * N:
        raise ValueError("objective degree exceeds 2N")
    y_basis = MonomialBasis(n, 2 * N)

    rows: list[dict[int, float]] = [{0: 1.0}]
    rhs: list[float] = [1.0]
    labels: list[str] = ["mass"]
    for k, h in enumerate(system.equalities, start=1):
        if h.is_zero():
            continue
        for form in equality_rows(h, n, N, y_basis):
            rows.append(form)
            rhs.append(0.0)
            labels.append(f"eq{k}")

    blocks = [localizing_block("moment", Polynomial.constant(n, 1.0), n, N, y_basis)]
    for k, q in enumerate(inequalities, start=1):
        if q.degree() > 2 * N:
            raise ValueError(f"inequality {k} degree {q.degree()} exceeds 2N")
        blocks.append(localizing_block(f"ineq{k}", q, n, N, y_basis))

    obj = np.zeros(len(y_basis))
    for alpha, c in objective.terms.items():
        obj[y_basis.index(alpha)] += c

    data, ri, ci = [], [], []
    for r, form in enumerate(rows):
        for k, c in form.items():
            ri.append(r)
            ci.append(k)
            data.append(c)
    E = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), len(y_basis)))
    return MomentProblem(n=n, order=N, basis=y_basis, sense=sense, objective=obj,
                         eq_rows=E, eq_rhs=np.array(rhs), eq_labels=labels,
                         blocks=blocks)
