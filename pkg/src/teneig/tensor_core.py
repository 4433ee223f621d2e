"""Symmetric tensors in coefficient form, plus eigenpair containers and file IO.

An order-``m`` symmetric tensor on R^n is stored through the coefficients of
its associated homogeneous form:  ``A x^m = sum_alpha  c_alpha * x^alpha``
with ``|alpha| = m``.  This costs ``C(n+m-1, m)`` floats instead of ``n^m``
and makes contraction a polynomial-differentiation exercise.  Individual
entries ``A[i1, ..., im]`` remain available through multinomial weights.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .poly import Polynomial


def _class_key(idx) -> tuple[int, ...]:
    """Sorted index tuple identifying a symmetric entry class (1-based)."""
    return tuple(sorted(int(i) for i in idx))


def _exponent_of(idx, n: int) -> tuple[int, ...]:
    alpha = [0] * n
    for i in idx:
        alpha[int(i) - 1] += 1
    return tuple(alpha)


def _perm_count(alpha, m: int) -> int:
    """Number of distinct index orderings of an entry class with exponent alpha."""
    count = math.factorial(m)
    for e in alpha:
        count //= math.factorial(e)
    return count


class SymmetricTensor:
    """A real symmetric tensor of order ``m`` on ``R^n``.

    ``coeffs`` maps exponent tuples ``alpha`` (``|alpha| = m``) to the
    coefficient of ``x^alpha`` in ``A x^m``.  Order-0 tensors are scalars.
    """

    __slots__ = ("n", "m", "coeffs")

    def __init__(self, n: int, m: int, coeffs=None):
        self.n = int(n)
        self.m = int(m)
        if self.n < 1:
            raise ValueError("need at least one variable")
        if self.m < 0:
            raise ValueError("tensor order must be nonnegative")
        acc: dict[tuple[int, ...], float] = {}
        if coeffs:
            for alpha, c in dict(coeffs).items():
                key = tuple(int(e) for e in alpha)
                if len(key) != self.n or any(e < 0 for e in key):
                    raise ValueError(f"bad exponent {key} for n={self.n}")
                if sum(key) != self.m:
                    raise ValueError(
                        f"exponent {key} has degree {sum(key)}, expected {self.m}")
                if c != 0.0:
                    acc[key] = acc.get(key, 0.0) + float(c)
        self.coeffs = {k: v for k, v in acc.items() if v != 0.0}

    # ---------------------------------------------------------- constructors

    @classmethod
    def from_entries(cls, n: int, m: int, entries) -> "SymmetricTensor":
        """Build from raw entries ``{(i1, ..., im): value}`` with 1-based indices.

        Unlisted entries are zero; the symmetrized entry of each sorted index
        class is the average of all raw values placed in that class, i.e. the
        associated form is ``sum over provided (idx, v) of v * x^idx``.
        """
        acc: dict[tuple[int, ...], float] = {}
        for idx, value in dict(entries).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != m:
                raise ValueError(f"index {idx} has length {len(idx)}, expected {m}")
            if any(not 1 <= i <= n for i in idx):
                raise ValueError(f"index {idx} outside 1..{n}")
            alpha = _exponent_of(idx, n)
            acc[alpha] = acc.get(alpha, 0.0) + float(value)
        return cls(n, m, acc)

    @classmethod
    def from_entry_classes(cls, n: int, m: int, classes) -> "SymmetricTensor":
        """Build from symmetric entry values ``{sorted index class: entry}``.

        Every permutation of the class shares the given entry value, so the
        coefficient of ``x^alpha`` is ``entry * m! / alpha!``.
        """
        acc: dict[tuple[int, ...], float] = {}
        for idx, value in dict(classes).items():
            key = _class_key(idx)
            if len(key) != m or any(not 1 <= i <= n for i in key):
                raise ValueError(f"bad index class {idx}")
            alpha = _exponent_of(key, n)
            acc[alpha] = acc.get(alpha, 0.0) + float(value) * _perm_count(alpha, m)
        return cls(n, m, acc)

    @classmethod
    def from_dense(cls, array) -> "SymmetricTensor":
        """Symmetrize a raw ``n^m`` entry array (the associated form is kept)."""
        arr = np.asarray(array, dtype=float)
        m = arr.ndim
        n = arr.shape[0] if m else 1
        if m and arr.shape != (n,) * m:
            raise ValueError(f"expected cubical shape, got {arr.shape}")
        if m == 0:
            return cls(1, 0, {(0,): float(arr)})
        acc: dict[tuple[int, ...], float] = {}
        for idx in itertools.product(range(1, n + 1), repeat=m):
            v = float(arr[tuple(i - 1 for i in idx)])
            if v != 0.0:
                alpha = _exponent_of(idx, n)
                acc[alpha] = acc.get(alpha, 0.0) + v
        return cls(n, m, acc)

    @classmethod
    def from_polynomial(cls, p: Polynomial, m: int | None = None) -> "SymmetricTensor":
        if not p.is_homogeneous():
            raise ValueError("associated form must be homogeneous")
        deg = p.degree() if p.terms else (m if m is not None else 0)
        if m is not None and p.terms and deg != m:
            raise ValueError(f"polynomial degree {deg} != requested order {m}")
        return cls(p.n, deg, dict(p.terms))

    @classmethod
    def random_symmetric(cls, n: int, m: int, seed: int) -> "SymmetricTensor":
        """Symmetrization of an ``n^m`` array of i.i.d. standard normal entries."""
        rng = np.random.default_rng(seed)
        return cls.from_dense(rng.standard_normal((n,) * m))

    # --------------------------------------------------------------- queries

    def entry(self, idx) -> float:
        """The symmetric entry ``A[i1, ..., im]`` (1-based indices)."""
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.m:
            raise ValueError(f"index {idx} has length {len(idx)}, expected {self.m}")
        alpha = _exponent_of(idx, self.n)
        c = self.coeffs.get(alpha, 0.0)
        return c / _perm_count(alpha, self.m) if self.m else c

    def as_polynomial(self) -> Polynomial:
        if self.m == 0:
            return Polynomial.constant(self.n, self.scalar())
        return Polynomial(self.n, self.coeffs)

    def scalar(self) -> float:
        """Value of an order-0 tensor."""
        if self.m != 0:
            raise ValueError("not an order-0 tensor")
        return next(iter(self.coeffs.values()), 0.0)

    def as_vector(self) -> np.ndarray:
        """Components of an order-1 tensor."""
        if self.m != 1:
            raise ValueError("not an order-1 tensor")
        v = np.zeros(self.n)
        for alpha, c in self.coeffs.items():
            v[alpha.index(1)] = c
        return v

    def as_matrix(self) -> np.ndarray:
        """Entry matrix of an order-2 tensor."""
        if self.m != 2:
            raise ValueError("not an order-2 tensor")
        M = np.zeros((self.n, self.n))
        for alpha, c in self.coeffs.items():
            support = [i for i, e in enumerate(alpha) if e]
            if len(support) == 1:
                M[support[0], support[0]] = c
            else:
                i, j = support
                M[i, j] = M[j, i] = c / 2.0
        return M

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def scale(self, factor: float) -> "SymmetricTensor":
        return SymmetricTensor(
            self.n, self.m, {a: c * float(factor) for a, c in self.coeffs.items()})

    def __mul__(self, factor: float) -> "SymmetricTensor":
        return self.scale(factor)

    __rmul__ = __mul__

    def __neg__(self) -> "SymmetricTensor":
        return self.scale(-1.0)

    # ------------------------------------------------------------ contraction

    def contract(self, u, k: int) -> "SymmetricTensor":
        """Contract ``k`` slots with the vector ``u``; returns an order ``m-k`` tensor.

        One contraction of an order-``d`` form is ``(1/d) * sum_j u_j dp/dx_j``.
        """
        if not 0 <= k <= self.m:
            raise ValueError(f"cannot contract {k} slots of an order-{self.m} tensor")
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"vector has shape {u.shape}, expected ({self.n},)")
        p = self.as_polynomial()
        for d in range(self.m, self.m - k, -1):
            step = Polynomial.zero(self.n)
            for j in range(self.n):
                if u[j] != 0.0:
                    step = step + p.partial(j + 1).scale(u[j])
            p = step.scale(1.0 / d)
        return SymmetricTensor.from_polynomial(p, self.m - k)

    def apply(self, u) -> np.ndarray:
        """The vector ``A u^{m-1}``."""
        return self.contract(u, self.m - 1).as_vector()

    def form_value(self, u) -> float:
        """The scalar ``A u^m``."""
        return self.as_polynomial().evaluate(np.asarray(u, dtype=float))


def b_tensor(kind: str, n: int, m: int | None = None, matrix=None) -> SymmetricTensor:
    """Normalizing tensors for the supported eigenvalue conventions.

    ``z``: order 2 with form ``sum x_i^2``;  ``h``: order ``m`` with form
    ``sum x_i^m``;  ``d``: order 2 with form ``x^T D x`` for a symmetric
    positive definite ``D``.
    """
    kind = kind.lower()
    if kind == "z":
        return SymmetricTensor(n, 2, {_exponent_of((i, i), n): 1.0
                                      for i in range(1, n + 1)})
    if kind == "h":
        if m is None:
            raise ValueError("kind 'h' needs the tensor order m")
        return SymmetricTensor(n, m, {_exponent_of((i,) * m, n): 1.0
                                      for i in range(1, n + 1)})
    if kind == "d":
        if matrix is None:
            raise ValueError("kind 'd' needs a matrix")
        D = np.asarray(matrix, dtype=float)
        if D.shape != (n, n) or not np.allclose(D, D.T, atol=1e-12 * max(1, abs(D).max())):
            raise ValueError("kind 'd' needs a symmetric n-by-n matrix")
        try:
            np.linalg.cholesky(D)
        except np.linalg.LinAlgError:
            raise ValueError("kind 'd' needs a positive definite matrix") from None
        coeffs: dict[tuple[int, ...], float] = {}
        for i in range(1, n + 1):
            coeffs[_exponent_of((i, i), n)] = float(D[i - 1, i - 1])
            for j in range(i + 1, n + 1):
                if D[i - 1, j - 1] != 0.0:
                    coeffs[_exponent_of((i, j), n)] = 2.0 * float(D[i - 1, j - 1])
        return SymmetricTensor(n, 2, coeffs)
    raise ValueError(f"unknown normalization kind {kind!r}")


@dataclass
class EigenPair:
    """One eigenvalue with the distinct unit-normalized eigenvectors found for it.

    ``paired`` marks pairs whose mirror ``(-lambda, -u)`` is also an
    eigenpair (tensor orders of opposite parity).  ``recovered`` marks
    eigenvectors obtained through the degenerate-recovery path rather than
    direct atom extraction.
    """

    lam: float
    vectors: list[np.ndarray] = field(default_factory=list)
    multiplicity: int = 0
    recovered: bool = False
    residual: float = float("nan")
    paired: bool = False

    def __post_init__(self):
        self.vectors = [np.asarray(v, dtype=float) for v in self.vectors]
        if not self.multiplicity:
            self.multiplicity = len(self.vectors)


# ------------------------------------------------------------------ file IO

def load_tensor_text(text: str) -> SymmetricTensor:
    """Parse the plain-text entry format.

    First non-comment line: ``n m``.  Each further line: ``i1 ... im value``
    with 1-based indices.  ``#`` starts a comment.
    """
    header = None
    entries: dict[tuple[int, ...], float] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise ValueError("header line must be 'n m'")
            header = (int(parts[0]), int(parts[1]))
            continue
        n, m = header
        if len(parts) != m + 1:
            raise ValueError(f"entry line {line!r} needs {m} indices and a value")
        idx = tuple(int(p) for p in parts[:m])
        entries[idx] = entries.get(idx, 0.0) + float(parts[m])
    if header is None:
        raise ValueError("empty tensor file")
    n, m = header
    return SymmetricTensor.from_entries(n, m, entries)


def load_tensor_json(text: str) -> SymmetricTensor:
    """Parse ``{"n":, "m":, "entries": [{"idx": [...], "val": ...}]}``."""
    doc = json.loads(text)
    try:
        n, m = int(doc["n"]), int(doc["m"])
        raw = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed tensor JSON: {exc}") from None
    entries: dict[tuple[int, ...], float] = {}
    for item in raw:
        idx = tuple(int(i) for i in item["idx"])
        entries[idx] = entries.get(idx, 0.0) + float(item["val"])
    return SymmetricTensor.from_entries(n, m, entries)


def load_tensor(path: str) -> SymmetricTensor:
    """Load a tensor file, sniffing JSON versus plain text."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return load_tensor_json(text)
    return load_tensor_text(text)


def dump_tensor_json(t: SymmetricTensor) -> str:
    """Serialize one item per index class.

    ``val`` carries the class's total raw weight (symmetric entry times the
    number of index orderings), which is what the loaders accumulate, so
    ``load_tensor_json(dump_tensor_json(t))`` reproduces ``t`` exactly.
    """
    items = []
    for alpha in sorted(t.coeffs):
        idx = []
        for i, e in enumerate(alpha, start=1):
            idx.extend([i] * e)
        items.append({"idx": idx, "val": t.coeffs[alpha]})
    return json.dumps({"n": t.n, "m": t.m, "entries": items})
