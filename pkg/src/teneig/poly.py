"""Sparse multivariate polynomial arithmetic over exponent-vector keys.

Monomials are keyed by integer exponent tuples of fixed length: the
polynomial ``x1**2 * x3 - 2`` in three variables is stored as
``{(2, 0, 1): 1.0, (0, 0, 0): -2.0}``.  Coefficients whose magnitude falls
below ``PRUNE_REL`` times the largest coefficient are dropped after every
arithmetic operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PRUNE_REL = 1e-14


def _as_key(alpha) -> tuple[int, ...]:
    return tuple(int(e) for e in alpha)


class Polynomial:
    """A real polynomial in ``n`` variables with sparse term storage.

    >>> p = Polynomial(2, {(3, 0): 1.0, (1, 2): 3.0})   # x1^3 + 3 x1 x2^2
    >>> p.evaluate([1.0, 2.0])
    13.0
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        acc: dict[tuple[int, ...], float] = {}
        if terms:
            for alpha, coeff in dict(terms).items():
                key = _as_key(alpha)
                if len(key) != self.n:
                    raise ValueError(
                        f"exponent {key} has length {len(key)}, expected {self.n}")
                if any(e < 0 for e in key):
                    raise ValueError(f"negative exponent in {key}")
                acc[key] = acc.get(key, 0.0) + float(coeff)
        self.terms = acc
        self._prune()

    # ------------------------------------------------------------------ util

    def _prune(self) -> None:
        if not self.terms:
            return
        biggest = max(abs(c) for c in self.terms.values())
        if biggest == 0.0:
            self.terms = {}
            return
        cutoff = PRUNE_REL * biggest
        self.terms = {a: c for a, c in self.terms.items() if abs(c) > cutoff}

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: float) -> "Polynomial":
        return cls(n, {(0,) * n: float(value)})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        """The coordinate polynomial ``x_i`` (``i`` is 1-based)."""
        if not 1 <= i <= n:
            raise ValueError(f"variable index {i} outside 1..{n}")
        alpha = [0] * n
        alpha[i - 1] = 1
        return cls(n, {tuple(alpha): 1.0})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        if not self.terms:
            return 0
        return max(sum(a) for a in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(a) for a in self.terms}
        return len(degs) <= 1

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def copy(self) -> "Polynomial":
        return Polynomial(self.n, self.terms)

    # ------------------------------------------------------------ arithmetic

    def _check_same_space(self, other: "Polynomial") -> None:
        if self.n != other.n:
            raise ValueError(f"mixing polynomials in {self.n} and {other.n} variables")

    def add(self, other: "Polynomial") -> "Polynomial":
        self._check_same_space(other)
        acc = dict(self.terms)
        for a, c in other.terms.items():
            acc[a] = acc.get(a, 0.0) + c
        return Polynomial(self.n, acc)

    def sub(self, other: "Polynomial") -> "Polynomial":
        return self.add(other.scale(-1.0))

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.n, {a: c * float(factor) for a, c in self.terms.items()})

    def mul(self, other: "Polynomial") -> "Polynomial":
        self._check_same_space(other)
        acc: dict[tuple[int, ...], float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(ea + eb for ea, eb in zip(a, b))
                acc[key] = acc.get(key, 0.0) + ca * cb
        return Polynomial(self.n, acc)

    def pow(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.n, 1.0)
        for _ in range(k):
            out = out.mul(self)
        return out

    def add_constant(self, value: float) -> "Polynomial":
        return self.add(Polynomial.constant(self.n, value))

    __add__ = add
    __sub__ = sub
    __mul__ = mul

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __rmul__(self, factor: float) -> "Polynomial":
        return self.scale(factor)

    # ------------------------------------------------------------- calculus

    def partial(self, i: int) -> "Polynomial":
        """Partial derivative with respect to ``x_i`` (1-based)."""
        if not 1 <= i <= self.n:
            raise ValueError(f"variable index {i} outside 1..{self.n}")
        acc: dict[tuple[int, ...], float] = {}
        j = i - 1
        for a, c in self.terms.items():
            if a[j] == 0:
                continue
            key = a[:j] + (a[j] - 1,) + a[j + 1:]
            acc[key] = acc.get(key, 0.0) + c * a[j]
        return Polynomial(self.n, acc)

    def gradient(self) -> list["Polynomial"]:
        return [self.partial(i) for i in range(1, self.n + 1)]

    def evaluate(self, point) -> float:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        total = 0.0
        for a, c in self.terms.items():
            term = c
            for e, xv in zip(a, x):
                if e:
                    term *= xv ** e
            total += term
        return total

    def eval_gradient(self, point) -> np.ndarray:
        return np.array([g.evaluate(point) for g in self.gradient()])

    # -------------------------------------------------------------- display

    def allclose(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        self._check_same_space(other)
        keys = set(self.terms) | set(other.terms)
        scale = max(self.max_abs_coeff(), other.max_abs_coeff(), 1.0)
        return all(
            abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= tol * scale
            for k in keys
        )

    def __repr__(self) -> str:
        if not self.terms:
            return "Polynomial(0)"
        bits = []
        for a in sorted(self.terms, key=lambda t: (sum(t), tuple(-e for e in t))):
            c = self.terms[a]
            mono = "*".join(
                f"x{i+1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(a) if e
            )
            bits.append(f"{c:+g}" + (f"*{mono}" if mono else ""))
        return "Polynomial(" + " ".join(bits) + ")"


@dataclass(frozen=True)
class ConstraintSystem:
    """The polynomial system cutting out the admissible critical vectors.

    ``equalities`` lists, in order, the pairwise weighted-gradient minors of
    the objective/normalization pair followed by the normalization itself;
    every admissible critical point of ``f`` on ``{g = 0}`` is a common real
    zero of these polynomials.
    """

    n: int
    m: int
    m_prime: int
    f: Polynomial
    g: Polynomial
    equalities: tuple[Polynomial, ...] = field(default_factory=tuple)

    @property
    def base_order(self) -> int:
        """Smallest admissible relaxation order for this system."""
        return max((self.m + self.m_prime - 1) // 2, (self.m + 1) // 2, 1)


def build_jacobian_system(A, B) -> ConstraintSystem:
    """Assemble the determinantal equality system for the pair ``(A, B)``.

    ``f = A x^m`` and ``g = B x^{m'} - 1``.  For ``n >= 2`` the system is

        h_r = sum over i < j with i + j = r + 2 of
              (df/dx_i)(dg/dx_j) - (df/dx_j)(dg/dx_i),   r = 1..2n-3,

    followed by ``g`` itself, for a total of ``2n - 2`` polynomials.  For
    ``n = 1`` the normalization alone suffices.
    """
    if A.n != B.n:
        raise ValueError(f"tensor dimensions differ: {A.n} vs {B.n}")
    n = A.n
    f = A.as_polynomial()
    g = B.as_polynomial().add_constant(-1.0)
    if n == 1:
        return ConstraintSystem(n=n, m=A.m, m_prime=B.m, f=f, g=g, equalities=(g,))
    fx = f.gradient()
    gx = g.gradient()
    eqs: list[Polynomial] = []
    for r in range(1, 2 * n - 2):
        h = Polynomial.zero(n)
        for i in range(1, n + 1):
            j = r + 2 - i
            if i < j <= n:
                h = h + (fx[i - 1] * gx[j - 1] - fx[j - 1] * gx[i - 1])
        eqs.append(h)
    eqs.append(g)
    return ConstraintSystem(n=n, m=A.m, m_prime=B.m, f=f, g=g, equalities=tuple(eqs))
