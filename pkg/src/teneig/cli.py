"""Command-line front end for the tensor eigenvalue solver.

Loads a tensor (from a file or a named built-in example), runs the
spectrum descent, and prints either a human-readable table or a JSON
report.  Exit status: 0 when the spectrum was certifiably exhausted,
2 when the run ended with a partial answer, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .examples import EXAMPLE_NAMES, build_example
from .hierarchy import SolverConfig, all_eigenpairs
from .moment import compile_relaxation
from .oracle import circle_scan, newton_multistart
from .poly import Polynomial, build_jacobian_system
from .tensor_core import SymmetricTensor, b_tensor, load_tensor

__all__ = ["RunReport", "main", "parse_region_file"]

_SYMMETRY_FLAGS = {"none": "none", "sorted": "sorted_descending",
                   "nonneg": "nonnegative_orthant"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting, so the exit code
    stays under our control (usage errors must return 1, not 2)."""

    def error(self, message):
        raise _UsageError(message)


def _plain(obj):
    """Recursively convert numpy scalars/arrays and non-string keys so the
    result survives a JSON round trip unchanged."""
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


@dataclass
class RunReport:
    """Everything one run produced, in JSON-serializable form."""

    input: dict
    config: dict
    spectrum: list
    pairs: list
    complete: bool
    warnings: list
    stats: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        raw = json.loads(text)
        return cls(**{f.name: raw[f.name] for f in fields(cls)})


def parse_region_file(path: str, n: int) -> list[Polynomial]:
    """Read one polynomial per line; terms are ``coeff:e1,e2,...,en`` tokens
    separated by whitespace, ``#`` starts a comment."""
    polys: list[Polynomial] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            terms: dict[tuple[int, ...], float] = {}
            for token in line.split():
                coeff_s, sep, exps_s = token.partition(":")
                if not sep:
                    raise ValueError(
                        f"{path}:{lineno}: bad term {token!r} "
                        "(expected coeff:e1,e2,...)")
                exps = tuple(int(e) for e in exps_s.split(","))
                if len(exps) != n:
                    raise ValueError(
                        f"{path}:{lineno}: term {token!r} has {len(exps)} "
                        f"exponents, expected {n}")
                terms[exps] = terms.get(exps, 0.0) + float(coeff_s)
            polys.append(Polynomial(n, terms))
    return polys


def _build_parser() -> _Parser:
    p = _Parser(prog="teneig",
                description="Compute all real eigenvalues (with eigenvectors)"
                            " of a real symmetric tensor.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tensor", metavar="PATH",
                     help="tensor file (text: 'n m' header then"
                          " 'i1 ... im value' lines; or JSON)")
    src.add_argument("--example", metavar="NAME", choices=EXAMPLE_NAMES,
                     help="built-in example, one of: " + ", ".join(EXAMPLE_NAMES))
    p.add_argument("--kind", default=None, metavar="KIND",
                   help="z | h | d:<matrixfile> | b:<tensorfile>"
                        " (default: z, or the example's preferred kind)")
    p.add_argument("--delta0", type=float, default=0.05,
                   help="initial exclusion width between eigenvalues")
    p.add_argument("--epsilon0", type=float, default=0.05,
                   help="initial band half-width for eigenvector recovery")
    p.add_argument("--nmax", type=int, default=None,
                   help="relaxation order cap (default: base order + 3)")
    p.add_argument("--rank-tol", type=float, default=1e-6)
    p.add_argument("--residual-tol", type=float, default=1e-6)
    p.add_argument("--symmetry", choices=sorted(_SYMMETRY_FLAGS), default=None,
                   help="symmetry-breaking constraints: none | sorted | nonneg"
                        " (default: none, or the example's suggestion)")
    p.add_argument("--band", nargs=2, type=float, metavar=("A", "B"),
                   default=None, help="restrict to eigenvalues in [A, B]")
    p.add_argument("--region", metavar="POLYFILE", default=None,
                   help="restrict eigenvectors to {q >= 0} for each"
                        " polynomial q in the file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--dump-relaxation", action="store_true",
                   help="print the assembled base relaxation and exit")
    p.add_argument("--verify-oracle", action="store_true",
                   help="cross-check the spectrum against an independent"
                        " root-finding oracle")
    p.add_argument("--verbose", action="store_true",
                   help="print per-step diagnostics to stderr")
    return p


def _resolve_input(args):
    """Return (tensor, source label, default kind flag, default symmetry)."""
    if args.example:
        case = build_example(args.example)
        return case.tensor, f"example:{case.name}", case.kind, case.symmetry
    tensor = load_tensor(args.tensor)
    return tensor, f"file:{args.tensor}", "z", "none"


def _resolve_kind(kind_flag: str, A: SymmetricTensor):
    """Map the --kind flag to (kind label, kind for the solver, B or None)."""
    if kind_flag in ("z", "h"):
        return kind_flag, kind_flag, None
    if kind_flag.startswith("d:"):
        D = np.loadtxt(kind_flag[2:], ndmin=2)
        return "d", "d", b_tensor("d", A.n, matrix=D)
    if kind_flag.startswith("b:"):
        return "custom", None, load_tensor(kind_flag[2:])
    raise _UsageError(f"unknown kind {kind_flag!r}; expected z, h, "
                      "d:<matrixfile>, or b:<tensorfile>")


def _format_value(pair_dict: dict) -> str:
    s = f"{pair_dict['lambda']:.4f}"
    if pair_dict["multiplicity"] > 1:
        s += f"({pair_dict['multiplicity']})"
    if pair_dict["recovered"]:
        s += "(⋆)"
    return s


def _print_table(report: RunReport, out) -> None:
    info = report.input
    print(f"tensor: {info['source']} (n={info['n']}, m={info['m']}), "
          f"kind {info['kind']}", file=out)
    if not report.pairs:
        print("spectrum: empty (no real eigenvalues in the requested set)",
              file=out)
    else:
        line = ", ".join(_format_value(p) for p in report.pairs)
        print(f"spectrum: {line}", file=out)
        print(file=out)
        for k, p in enumerate(report.pairs, 1):
            print(f"lambda_{k} = {_format_value(p)}", file=out)
            for u in p["vectors"]:
                coords = ", ".join(f"{x if abs(x) >= 5e-5 else 0.0:8.4f}"
                                   for x in u)
                print(f"  u = ({coords})", file=out)
    print(file=out)
    status = "yes" if report.complete else "no (partial answer)"
    print(f"complete: {status}", file=out)
    for w in report.warnings:
        print(f"warning: {w}", file=out)


def _oracle_check(A: SymmetricTensor, B: SymmetricTensor | None,
                  kind_label: str, spectrum: list, seed: int) -> dict:
    """Compare against an independent oracle; sound for n=2 (dense circle
    scan), sampling-based otherwise."""
    if A.n == 2 and kind_label == "z":
        ref = circle_scan(A.as_polynomial())
    else:
        ref = newton_multistart(A, B, kind=kind_label if B is None else None,
                                starts=500, seed=seed)
    tol = max(1e-6, 10.0 * ref.tolerance)
    missed = [v for v in ref.eigenvalues
              if all(abs(v - s) > tol * (1.0 + abs(v)) for s in spectrum)]
    extra = [s for s in spectrum
             if all(abs(s - v) > tol * (1.0 + abs(s)) for v in ref.eigenvalues)]
    return _plain({"source": ref.source, "eigenvalues": list(ref.eigenvalues),
                   "missed": missed, "extra": extra,
                   "agrees": not missed and not extra})


def run(args) -> tuple[int, RunReport | None]:
    A, source, kind_default, symmetry_default = _resolve_input(args)
    kind_label, kind, B = _resolve_kind(args.kind or kind_default, A)
    symmetry = (_SYMMETRY_FLAGS[args.symmetry] if args.symmetry
                else symmetry_default)
    config = SolverConfig(
        delta0=args.delta0, epsilon0=args.epsilon0, max_order=args.nmax,
        rank_tol=args.rank_tol, residual_tol=args.residual_tol,
        seed=args.seed, symmetry=symmetry,
        eigen_kind=kind if kind in ("z", "h") else "z")

    if args.dump_relaxation:
        Bt = B if B is not None else b_tensor(kind, A.n, m=A.m)
        system = build_jacobian_system(A, Bt)
        problem = compile_relaxation(system, system.base_order,
                                     system.f, "max")
        print(problem.describe())
        return 0, None

    region = (tuple(parse_region_file(args.region, A.n))
              if args.region else ())
    band = tuple(args.band) if args.band else None
    spectrum = all_eigenpairs(A, B, kind=kind, config=config,
                              band=band, region=region)

    diagnostics = dict(spectrum.diagnostics)
    steps = diagnostics.pop("steps", [])
    warnings = list(spectrum.warnings)
    stats = _plain({**diagnostics, "steps": steps})
    if args.verify_oracle:
        stats["oracle"] = _oracle_check(A, B, kind_label,
                                        spectrum.eigenvalues, args.seed)
        if not stats["oracle"]["agrees"]:
            warnings.append("oracle cross-check disagrees with the computed "
                            "spectrum")
    report = RunReport(
        input=_plain({"source": source, "n": A.n, "m": A.m,
                      "kind": kind_label}),
        config=_plain({**asdict(config), "band": band,
                       "region": args.region}),
        spectrum=_plain(spectrum.eigenvalues),
        pairs=_plain([
            {"lambda": p.lam, "vectors": [list(u) for u in p.vectors],
             "multiplicity": p.multiplicity, "recovered": p.recovered,
             "residual": p.residual, "paired": p.paired}
            for p in spectrum.pairs]),
        complete=spectrum.complete,
        warnings=_plain(warnings),
        stats=stats)
    if args.verbose:
        for step in stats["steps"]:
            print(f"[step] {json.dumps(step, sort_keys=True)}",
                  file=sys.stderr)
    return (0 if spectrum.complete else 2), report


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        code, report = run(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if report is not None:
        if args.format == "json":
            print(report.to_json())
        else:
            _print_table(report, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
