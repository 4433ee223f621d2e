"""Real eigenvalues and eigenvectors of real symmetric tensors.

The solver enumerates every real generalized eigenvalue of a symmetric
tensor by descending through the spectrum: each eigenvalue is the optimum
of a polynomial optimization problem over the critical-point variety, and
each such problem is solved through a convergent ladder of moment-matrix
semidefinite relaxations with flat-truncation certificates.

Typical use::

    from teneig import b_tensor, SymmetricTensor, all_eigenpairs

    A = SymmetricTensor.from_dense(array)     # or .from_entries(...)
    spectrum = all_eigenpairs(A)              # Z-eigenpairs by default
    for pair in spectrum.pairs:
        print(pair.lam, pair.vector)

The command line entry point ``teneig`` exposes the same pipeline for
tensors stored in text or JSON files.
"""

from .tensor_core import (
    EigenPair,
    SymmetricTensor,
    b_tensor,
    dump_tensor_json,
    load_tensor,
    load_tensor_json,
    load_tensor_text,
)
from .poly import ConstraintSystem, Polynomial, build_jacobian_system
from .moment import MomentProblem, MonomialBasis, Tms, basis_size, compile_relaxation
from .sdp import ConicSolution, rank_of_psd, solve
from .extract import FlatnessReport, check_flatness, extract_atoms, verify_eigenpair
from .hierarchy import (
    SolverConfig,
    Spectrum,
    all_eigenpairs,
    constrained_eigenvalues,
    eigenvalue_count_bound,
    largest_eigenvalue,
)
from .oracle import OracleSpectrum, circle_scan, diagonal_z_spectrum, newton_multistart
from .examples import EXAMPLE_NAMES, ExampleCase, build_example
from .cli import RunReport, main

__version__ = "0.1.0"

__all__ = [
    "EigenPair",
    "SymmetricTensor",
    "b_tensor",
    "dump_tensor_json",
    "load_tensor",
    "load_tensor_json",
    "load_tensor_text",
    "ConstraintSystem",
    "Polynomial",
    "build_jacobian_system",
    "MomentProblem",
    "MonomialBasis",
    "Tms",
    "basis_size",
    "compile_relaxation",
    "ConicSolution",
    "rank_of_psd",
    "solve",
    "FlatnessReport",
    "check_flatness",
    "extract_atoms",
    "verify_eigenpair",
    "SolverConfig",
    "Spectrum",
    "all_eigenpairs",
    "constrained_eigenvalues",
    "eigenvalue_count_bound",
    "largest_eigenvalue",
    "OracleSpectrum",
    "circle_scan",
    "diagonal_z_spectrum",
    "newton_multistart",
    "EXAMPLE_NAMES",
    "ExampleCase",
    "build_example",
    "RunReport",
    "main",
    "__version__",
]
