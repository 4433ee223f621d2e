"""Built-in example tensors, constructed programmatically.

Each named case builds a specific symmetric tensor together with the
eigenvalue kind and symmetry-breaking suggestion it is usually studied
under.  Parametrized cases accept keyword overrides (``a`` for the
quartic families, ``n`` for the entrywise families, ``seed`` for the
randomized ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .poly import Polynomial
from .tensor_core import SymmetricTensor

__all__ = ["ExampleCase", "EXAMPLE_NAMES", "build_example"]


@dataclass(frozen=True)
class ExampleCase:
    """A named tensor plus the options it is meant to be solved with."""

    name: str
    tensor: SymmetricTensor
    kind: str = "z"
    symmetry: str = "none"
    params: dict = field(default_factory=dict)


def _poly_power_sum(n: int, weights, power: int) -> Polynomial:
    """sum_i weights[i] * x_i^power as a Polynomial."""
    terms = {}
    for i, w in enumerate(weights):
        if w != 0.0:
            alpha = tuple(power if j == i else 0 for j in range(n))
            terms[alpha] = float(w)
    return Polynomial(n, terms)


def _linear_form(n: int, coeffs) -> Polynomial:
    terms = {}
    for i, c in enumerate(coeffs):
        if c != 0.0:
            alpha = tuple(1 if j == i else 0 for j in range(n))
            terms[alpha] = float(c)
    return Polynomial(n, terms)


def _pairwise_difference_quartic(n: int) -> Polynomial:
    total = Polynomial.zero(n)
    for i in range(n):
        for j in range(i + 1, n):
            diff = _linear_form(n, [1.0 if k == i else (-1.0 if k == j else 0.0)
                                    for k in range(n)])
            total = total.add(diff.pow(4))
    return total


def _entrywise(n: int, m: int, rule) -> SymmetricTensor:
    """Tensor whose entry at (i1..im) is rule(i1..im) with 1-based indices."""
    shape = (n,) * m
    arr = np.zeros(shape)
    for idx in np.ndindex(shape):
        arr[idx] = rule(tuple(i + 1 for i in idx))
    return SymmetricTensor.from_dense(arr)


def _ex4_1(params):
    t = SymmetricTensor(3, 4, {(4, 0, 0): 1.0, (0, 4, 0): 2.0, (0, 0, 4): 3.0})
    return ExampleCase("ex4_1", t)


def _ex4_2(params):
    seed = int(params.get("seed", 0))
    rng = np.random.default_rng(seed)
    P = np.eye(4)
    for _ in range(3):
        w = rng.standard_normal(4)
        w /= np.linalg.norm(w)
        P = P @ (np.eye(4) - 2.0 * np.outer(w, w))
    weights = (1.0, 2.0, -3.0, -4.0)
    total = Polynomial.zero(4)
    for i in range(4):
        row = _linear_form(4, P[i])
        total = total.add(row.pow(5).scale(weights[i]))
    t = SymmetricTensor.from_polynomial(total, 5)
    return ExampleCase("ex4_2", t, params={"seed": seed})


def _ex4_3(params):
    a = float(params.get("a", 0.0))
    t = SymmetricTensor(3, 4, {(4, 0, 0): 2.0, (0, 4, 0): 3.0,
                               (0, 0, 4): 5.0, (2, 1, 1): 4.0 * a})
    return ExampleCase("ex4_3", t, params={"a": a})


def _ex4_4(params):
    a = float(params.get("a", 0.0))
    t = SymmetricTensor(2, 4, {(4, 0): 3.0, (0, 4): 1.0, (2, 2): 6.0 * a})
    return ExampleCase("ex4_4", t, params={"a": a})


def _ex4_5(params):
    classes = {
        (1, 1, 1, 1): 0.2883, (1, 1, 1, 2): -0.0031, (1, 1, 1, 3): 0.1973,
        (1, 1, 2, 2): -0.2485, (1, 1, 2, 3): -0.2939, (1, 1, 3, 3): 0.3847,
        (1, 2, 2, 2): 0.2972, (1, 2, 2, 3): 0.1862, (1, 2, 3, 3): 0.0919,
        (1, 3, 3, 3): -0.3619, (2, 2, 2, 2): 0.1241, (2, 2, 2, 3): -0.3420,
        (2, 2, 3, 3): 0.2127, (2, 3, 3, 3): 0.2727, (3, 3, 3, 3): -0.3054,
    }
    t = SymmetricTensor.from_entry_classes(3, 4, classes)
    return ExampleCase("ex4_5", t)


def _ex4_6(params):
    terms = {}
    for i in range(6):
        terms[tuple(3 if j == i else 0 for j in range(6))] = 1.0
    for i in range(5):
        alpha = [0] * 6
        alpha[i] = 2
        alpha[i + 1] = 1
        terms[tuple(alpha)] = 30.0
    t = SymmetricTensor.from_polynomial(Polynomial(6, terms), 3)
    return ExampleCase("ex4_6", t)


def _ex4_7(params):
    t = SymmetricTensor.from_polynomial(
        _pairwise_difference_quartic(6).scale(-1.0), 4)
    return ExampleCase("ex4_7", t, symmetry="sorted_descending")


def _ex4_8(params):
    first = _linear_form(5, (1.0, 1.0, 1.0, 1.0, 0.0))
    second = _linear_form(5, (0.0, 1.0, 1.0, 1.0, 1.0))
    t = SymmetricTensor.from_polynomial(first.pow(4).add(second.pow(4)), 4)
    return ExampleCase("ex4_8", t)


def _ex4_9(params):
    t = SymmetricTensor(3, 3, {(3, 0, 0): 2.0, (1, 2, 0): 3.0, (1, 0, 2): 3.0})
    return ExampleCase("ex4_9", t)


def _ex4_10(params):
    t = SymmetricTensor(3, 6, {(4, 2, 0): 1.0, (2, 4, 0): 1.0,
                               (0, 0, 6): 1.0, (2, 2, 2): -3.0})
    return ExampleCase("ex4_10", t, kind="h", symmetry="nonnegative_orthant")


def _ex4_11(params):
    n = int(params.get("n", 5))

    def rule(idx):
        return sum((-1.0) ** i / i for i in idx)

    return ExampleCase("ex4_11", _entrywise(n, 3, rule), params={"n": n})


def _ex4_12(params):
    n = int(params.get("n", 5))

    def rule(idx):
        return math.sin(sum(idx))

    return ExampleCase("ex4_12", _entrywise(n, 4, rule), params={"n": n})


def _ex4_13(params):
    n = int(params.get("n", 5))

    def rule(idx):
        return sum(math.tan(i) for i in idx)

    return ExampleCase("ex4_13", _entrywise(n, 4, rule), params={"n": n})


def _ex4_14(params):
    n = int(params.get("n", 4))

    def rule(idx):
        return sum(math.log(i) for i in idx)

    return ExampleCase("ex4_14", _entrywise(n, 5, rule), params={"n": n})


def _ex4_15(params):
    n = int(params.get("n", 3))
    m = int(params.get("m", 3))
    seed = int(params.get("seed", 0))
    t = SymmetricTensor.random_symmetric(n, m, seed)
    return ExampleCase("ex4_15", t, params={"n": n, "m": m, "seed": seed})


def _ex4_16(params):
    n = int(params.get("n", 4))
    t = SymmetricTensor.from_polynomial(_pairwise_difference_quartic(n), 4)
    return ExampleCase("ex4_16", t, symmetry="sorted_descending",
                       params={"n": n})


def _ex4_17(params):
    t = SymmetricTensor.from_entry_classes(
        2, 3, {(1, 1, 1): 1.0, (2, 2, 2): 1.0 + 1e-6})
    return ExampleCase("ex4_17", t)


_BUILDERS = {
    "ex4_1": _ex4_1, "ex4_2": _ex4_2, "ex4_3": _ex4_3, "ex4_4": _ex4_4,
    "ex4_5": _ex4_5, "ex4_6": _ex4_6, "ex4_7": _ex4_7, "ex4_8": _ex4_8,
    "ex4_9": _ex4_9, "ex4_10": _ex4_10, "ex4_11": _ex4_11, "ex4_12": _ex4_12,
    "ex4_13": _ex4_13, "ex4_14": _ex4_14, "ex4_15": _ex4_15,
    "ex4_16": _ex4_16, "ex4_17": _ex4_17,
}

EXAMPLE_NAMES = tuple(sorted(_BUILDERS, key=lambda s: int(s.split("_")[1])))


def build_example(name: str, **params) -> ExampleCase:
    """Construct a named example; unknown names raise KeyError."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; known: "
                       f"{', '.join(EXAMPLE_NAMES)}") from None
    return builder(params)
