"""Sequential computation of all real eigenvalues of a symmetric tensor.

The driver walks the spectrum downward.  Each eigenvalue is the optimum of a
polynomial optimization problem over the critical variety (the gradient-rank
equalities plus the normalization surface), solved through a ladder of moment
relaxations of increasing order.  Between consecutive eigenvalues a shrinking
exclusion window certifies that nothing was skipped, and the bottom of the
spectrum is certified by an infeasible relaxation.  When an optimizer set is
not finite (so no finite-atom representation exists), a thin band around the
eigenvalue is searched with a random linear objective to recover a single
verified eigenvector.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .extract import (check_flatness, extract_atoms, support_candidates,
                      verify_eigenpair)
from .moment import Tms, compile_relaxation
from .poly import Polynomial, build_jacobian_system
from .tensor_core import EigenPair, SymmetricTensor, b_tensor

DELTA_FLOOR = 1e-12

SYMMETRY_MODES = ("none", "sorted_descending", "nonnegative_orthant")


def eigenvalue_count_bound(n: int, m: int) -> int:
    """Upper bound on the number of distinct eigenvalues of an order-m tensor
    on R^n, counting a sign-mirrored pair as one."""
    if m > 2:
        return ((m - 1) ** n - 1) // (m - 2)
    return n


@dataclass
class SolverConfig:
    """Tuning knobs for the spectrum descent.

    ``delta0``/``delta_shrink`` control the exclusion window separating
    consecutive eigenvalues; ``epsilon0``/``epsilon_shrink`` control the value
    band used to recover an eigenvector when the optimizer set is not finite.
    ``max_order`` bounds the relaxation ladder (``None`` means the base order
    of the constraint system plus three, or plus two beyond four variables,
    where each extra order multiplies the block sides severalfold).
    ``symmetry`` optionally adds
    symmetry-breaking inequalities: ``sorted_descending`` restricts to
    x1 >= x2 >= ... >= xn (for coordinate-permutation-invariant tensors),
    ``nonnegative_orthant`` to x_i >= 0 (for tensors even in each variable).
    """

    delta0: float = 0.05
    delta_shrink: float = 5.0
    epsilon0: float = 0.05
    epsilon_shrink: float = 5.0
    max_order: int | None = None
    rank_tol: float = 1e-6
    residual_tol: float = 1e-6
    seed: int = 0
    symmetry: str = "none"
    eigen_kind: str = "z"
    feastol: float = 1e-8
    gaptol: float = 1e-8
    certtol: float = 1e-7
    max_sdp_iter: int = 200
    stabilization_tol: float = 1e-6
    max_eigenvalues: int = 0

    def __post_init__(self) -> None:
        if self.delta0 <= 0:
            raise ValueError("delta0 must be positive")
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")
        if self.delta_shrink <= 1 or self.epsilon_shrink <= 1:
            raise ValueError("shrink factors must exceed 1")
        if self.symmetry not in SYMMETRY_MODES:
            raise ValueError(
                f"symmetry must be one of {SYMMETRY_MODES}, got {self.symmetry!r}")


@dataclass
class Spectrum:
    """All eigenpairs found by one descent, in strictly decreasing order.

    ``complete`` is True exactly when the descent ended with a certified
    infeasible relaxation below the last eigenvalue, i.e. nothing was left
    out (within the requested band, if one was given).
    """

    pairs: list[EigenPair]
    complete: bool
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def eigenvalues(self) -> list[float]:
        return [p.lam for p in self.pairs]


@dataclass
class _LadderOutcome:
    kind: str  # "atoms" | "value" | "infeasible" | "inconclusive"
    order: int
    value: float | None = None
    atoms: list | None = None
    flat_t: int | None = None
    ell: int | None = None
    certificate: dict | None = None
    stabilized: bool = False
    exhausted: bool = False
    values: dict = field(default_factory=dict)
    tms: Tms | None = None


def _canonical_sign(u: np.ndarray) -> np.ndarray:
    """Pick the representative of {u, -u} whose coordinate sum is >= 0,
    breaking ties by the first nonzero coordinate."""
    scale = float(np.max(np.abs(u)))
    tol = 1e-9 * (scale if scale > 0 else 1.0)
    s = float(np.sum(u))
    if s < -tol:
        return -u
    if abs(s) <= tol:
        for x in u:
            if abs(x) > tol:
                return u if x > 0 else -u
    return u


def _within_upper(lam: float, upper: float | None,
                  width: float | None = None) -> bool:
    """Accept eigenvalues at or below the cut, with numerical slack that
    never exceeds a quarter of the exclusion width that set the cut."""
    if upper is None:
        return True
    slack = 1e-7 * (1.0 + abs(upper))
    if width is not None:
        slack = min(slack, 0.25 * width)
    return lam <= upper + slack


def _certificate_summary(cert: dict | None) -> dict:
    if not cert:
        return {}
    out = {}
    for key, value in cert.items():
        if isinstance(value, (int, float, str, bool)):
            out[key] = value
        elif isinstance(value, dict):
            out[key] = {k: v for k, v in value.items()
                        if isinstance(v, (int, float, str, bool))}
    return out


class _Run:
    """Mutable state shared by the steps of one spectrum computation."""

    def __init__(self, A: SymmetricTensor, B: SymmetricTensor,
                 config: SolverConfig):
        self.A = A
        self.B = B
        self.config = config
        self.system = build_jacobian_system(A, B)
        self.rng = np.random.default_rng(config.seed)
        self.warnings: list[str] = []
        self.steps: list[dict] = []
        self.solves = 0
        self.iterations = 0
        base = self.system.base_order
        headroom = 3 if self.system.n <= 4 else 2
        self.max_order = (config.max_order if config.max_order is not None
                          else base + headroom)
        if self.max_order < base:
            raise ValueError(
                f"max_order {self.max_order} is below the minimum usable "
                f"relaxation order {base}")

    # ------------------------------------------------------------- helpers

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    @property
    def sign_symmetry(self) -> str:
        """How negating a vector acts on eigenpairs: "even" fixes the
        eigenvalue, "odd" flips its sign, "none" leaves the surface."""
        if self.system.m_prime % 2 == 1:
            return "none"
        return "even" if self.system.m % 2 == 0 else "odd"

    def _finish(self, diag: dict, t0: float) -> dict:
        diag["seconds"] = time.perf_counter() - t0
        self.steps.append(diag)
        return diag

    # ----------------------------------------------------- relaxation ladder

    def ladder(self, objective: Polynomial, sense: str, inequalities,
               *, stop_on_stable: bool, start_order: int | None = None,
               stop_order: int | None = None) -> _LadderOutcome:
        """Escalate the relaxation order until a decisive event: verified
        atoms, certified infeasibility, a stabilized objective value (if
        requested), or exhaustion of the order budget.  ``stop_order`` lowers
        the top of the ladder below the run-wide budget."""
        cfg = self.config
        degrees = [q.degree() for q in inequalities]
        min_order = max([self.system.base_order] + [(d + 1) // 2 for d in degrees])
        window = min_order
        first = min_order if start_order is None else max(start_order, min_order)
        last = max(self.max_order, min_order)
        if stop_order is not None:
            last = max(min(last, stop_order), min_order)
        values: dict[int, float] = {}
        previous = None
        stabilized = False
        last_tms = None
        for order in range(first, last + 1):
            problem = compile_relaxation(self.system, order, objective, sense,
                                         inequalities=tuple(inequalities))
            sol = sdp.solve(problem, feastol=cfg.feastol, gaptol=cfg.gaptol,
                            certtol=cfg.certtol, max_iter=cfg.max_sdp_iter)
            self.solves += 1
            self.iterations += sol.iterations or 0
            if sol.status == "infeasible":
                return _LadderOutcome("infeasible", order,
                                      certificate=sol.certificate,
                                      values=values)
            if sol.status == "unbounded":
                self.warn(f"relaxation at order {order} reported an unbounded "
                          "objective; escalating the order")
                continue
            if sol.status != "optimal":
                self.warn(f"relaxation at order {order} was inconclusive "
                          f"({sol.message}); escalating the order")
                continue
            value = float(sol.primal_objective)
            values[order] = value
            tms = problem.tms(sol.y)
            last_tms = tms
            report = check_flatness(tms, window=window, rank_tol=cfg.rank_tol)
            if report.satisfied:
                atoms = extract_atoms(tms, report.t, report.ell,
                                      rank_tol=cfg.rank_tol, seed=cfg.seed)
                if atoms:
                    return _LadderOutcome("atoms", order, value=value,
                                          atoms=atoms, flat_t=report.t,
                                          ell=report.ell, values=values,
                                          tms=tms)
            if previous is not None and (
                    abs(value - previous)
                    <= cfg.stabilization_tol * (1.0 + abs(value))):
                stabilized = True
                if stop_on_stable:
                    return _LadderOutcome("value", order, value=value,
                                          stabilized=True, values=values,
                                          tms=tms)
            previous = value
        if values:
            top = max(values)
            return _LadderOutcome("value", top, value=values[top],
                                  stabilized=stabilized, exhausted=True,
                                  values=values, tms=last_tms)
        return _LadderOutcome("inconclusive", last, exhausted=True,
                              values=values)

    # --------------------------------------------------- atom verification

    def verify_atoms(self, atoms) -> list[list[tuple[float, np.ndarray, float]]]:
        """Newton-polish each extracted point into an exact eigenpair and
        group the survivors by eigenvalue, largest first."""
        cfg = self.config
        verified: list[tuple[float, np.ndarray, float]] = []
        for u in atoms:
            guess = float(self.system.f.evaluate(np.asarray(u, dtype=float)))
            u2, lam2, res, ok = verify_eigenpair(
                self.A, self.B, np.asarray(u, dtype=float), guess,
                residual_tol=cfg.residual_tol)
            if ok:
                verified.append((float(lam2), u2, float(res)))
        groups: list[list[tuple[float, np.ndarray, float]]] = []
        for item in sorted(verified, key=lambda t: -t[0]):
            for group in groups:
                if abs(group[0][0] - item[0]) <= 1e-8 * (1.0 + abs(item[0])):
                    group.append(item)
                    break
            else:
                groups.append([item])
        return groups

    def refine_vector(self, lam: float, u: np.ndarray, res: float):
        """Zero out trace components left by a smeared extraction, keeping
        the change only when re-polishing confirms the cleaned vector.

        An eigenvector whose small entries are exact zeros of the eigensystem
        sits at a rank-deficient Newton point, so polishing alone leaves
        leakage of order ``residual**(1/3)`` in those coordinates."""
        cfg = self.config
        scale = float(np.max(np.abs(u)))
        mask = np.abs(u) <= 1e-4 * scale
        if not mask.any() or mask.all():
            return lam, u, res
        v = np.where(mask, 0.0, u)
        v2, lam2, res2, ok = verify_eigenpair(self.A, self.B, v, lam,
                                              residual_tol=cfg.residual_tol)
        moved = float(np.max(np.abs(v2 - u)))
        if (ok and res2 <= max(res, 1e-12)
                and moved <= 1e-3 * (1.0 + scale)
                and abs(lam2 - lam) <= 1e-8 * (1.0 + abs(lam))):
            return float(lam2), v2, float(res2)
        return lam, u, res

    def normalize_vectors(self, vectors, lam: float,
                          residual: float = 0.0) -> list[np.ndarray]:
        """Apply the sign convention, then drop duplicates.

        Near a rank-deficient eigenpair the achievable vector accuracy is
        only ``residual**(1/3)``, so the duplicate threshold widens with the
        residual (but never past the reporting accuracy)."""
        sym = self.sign_symmetry
        if sym == "even" or (sym == "odd" and abs(lam) <= 1e-8):
            vectors = [_canonical_sign(u) for u in vectors]
        tol = min(1e-3, max(1e-5, 2.0 * max(residual, 0.0) ** (1.0 / 3.0)))
        out: list[np.ndarray] = []
        for u in vectors:
            if all(float(np.max(np.abs(u - v))) > tol for v in out):
                out.append(u)
        return out

    def build_pair(self, group, *, recovered: bool = False) -> EigenPair:
        group = [self.refine_vector(lam, u, res) for lam, u, res in group]
        lam = float(np.mean([item[0] for item in group]))
        residual = max(item[2] for item in group)
        vectors = self.normalize_vectors([item[1] for item in group], lam,
                                         residual=residual)
        return EigenPair(lam=lam, vectors=vectors, multiplicity=len(vectors),
                         recovered=recovered, residual=residual, paired=False)

    # ------------------------------------------------------- band recovery

    def recover_vector(self, lam_hat: float, base_inequalities,
                       *, prev_lam: float | None = None, slack: float = 0.0):
        """Search the thin band |f - lam_hat| <= eps for one verified
        eigenvector by minimizing a random linear objective; shrink eps, and
        redraw the objective a few times on failure.

        The band relaxation stays at the minimum usable order: when the
        eigenvalue's critical set is positive-dimensional the higher orders
        never flatten (and their solves grind), while the low-order moments
        already concentrate near the set.  Extracted atoms and the loose
        mean/principal-axis guesses both go through the same Newton
        verification, so an unconverged relaxation can suggest but never
        certify a pair.
        """
        cfg = self.config
        n = self.system.n
        mp = self.system.m_prime
        f = self.system.f
        eps0 = cfg.epsilon0
        if prev_lam is not None:
            third_gap = (prev_lam - lam_hat) / 3.0
            if third_gap > 0:
                eps0 = min(eps0, third_gap)
        eps_floor = max(2.0 * slack, 1e-9) * (1.0 + abs(lam_hat))
        for _ in range(5):
            coeffs = self.rng.standard_normal(n)
            objective = Polynomial(n, {
                tuple(int(i == j) for j in range(n)): float(coeffs[i])
                for i in range(n)})
            eps = eps0
            best = None
            while eps >= eps_floor:
                inequalities = list(base_inequalities)
                inequalities.append(f.add_constant(-(lam_hat - eps)))
                inequalities.append(f.scale(-1.0).add_constant(lam_hat + eps))
                out = self.ladder(objective, "min", inequalities,
                                  stop_on_stable=False,
                                  stop_order=self.system.base_order)
                if out.kind == "infeasible":
                    break  # the band no longer straddles an eigenvalue
                candidates = []
                if out.kind == "atoms":
                    candidates.extend(out.atoms)
                if out.tms is not None:
                    candidates.extend(support_candidates(out.tms))
                for u in candidates:
                    u = np.asarray(u, dtype=float)
                    nb = float(self.B.form_value(u))
                    if not np.isfinite(nb) or abs(nb) <= 1e-12:
                        continue
                    u = u / (np.sign(nb) * abs(nb) ** (1.0 / mp))
                    guess = float(f.evaluate(u))
                    u2, lam2, res, ok = verify_eigenpair(
                        self.A, self.B, u, guess,
                        residual_tol=cfg.residual_tol)
                    close = abs(lam2 - lam_hat) <= max(
                        2.0 * eps, 10.0 * slack * (1.0 + abs(lam_hat)))
                    if ok and close:
                        candidate = (float(lam2), u2, float(res))
                        if best is None or candidate[2] < best[2]:
                            best = candidate
                if best is not None:
                    return best
                eps /= cfg.epsilon_shrink
            if best is not None:
                return best
        return None

    # --------------------------------------------------------- eigen step

    def eigen_step(self, inequalities, *, upper: float | None = None,
                   width: float | None = None,
                   prev_lam: float | None = None,
                   witness: list | None = None, label: str):
        """Find the largest eigenvalue of the constrained problem.

        Returns ("pair", EigenPair, diag), ("bottom", None, diag) when the
        relaxation is certified infeasible, or ("abort", None, diag) when
        nothing could be certified within the order budget.  ``witness`` is
        an optional list of verified eigenpairs at one eigenvalue below the
        cut (found earlier by the gap probe); it is used as a last resort
        when the relaxations degenerate before certifying anything.
        """
        cfg = self.config
        t0 = time.perf_counter()
        diag: dict = {"step": label, "orders": {}, "recovered": False}
        start = None
        last_value = None
        while True:
            out = self.ladder(self.system.f, "max", inequalities,
                              stop_on_stable=True, start_order=start)
            for order, value in out.values.items():
                diag["orders"][order] = value
            if out.value is not None:
                last_value = out.value
            if out.kind == "infeasible":
                diag.update(outcome="infeasible", order=out.order,
                            certificate=_certificate_summary(out.certificate))
                self._finish(diag, t0)
                return "bottom", None, diag
            if out.kind == "atoms":
                groups = self.verify_atoms(out.atoms)
                chosen = None
                for group in groups:
                    if not _within_upper(group[0][0], upper, width):
                        continue
                    # A tight relaxation puts all its mass on maximizers, so
                    # the group's eigenvalue must reproduce the relaxation
                    # value; a mismatch means the flatness signal was
                    # spurious and the ladder must keep climbing.
                    worst = max(item[2] for item in group)
                    if abs(group[0][0] - out.value) <= max(
                            1e-6 * (1.0 + abs(out.value)), 100.0 * worst):
                        chosen = group
                        break
                if chosen is not None:
                    pair = self.build_pair(chosen)
                    diag.update(outcome="flat", order=out.order,
                                flat_t=out.flat_t, rank=out.ell)
                    self._finish(diag, t0)
                    return "pair", pair, diag
                self.warn(f"{label}: flat relaxation at order {out.order} "
                          "yielded no usable eigenvector; escalating")
            # A value resting on the upper cut is an artifact of a loose
            # relaxation, not an eigenvalue estimate worth recovering from.
            estimate = out.value if out.value is not None else last_value
            boundary = (upper is not None and estimate is not None
                        and abs(estimate - upper)
                        <= 1e-6 * (1.0 + abs(upper)))
            may_recover = estimate is not None and not boundary
            if may_recover and (out.stabilized or out.exhausted):
                rec = self.recover_vector(estimate, inequalities,
                                          prev_lam=prev_lam,
                                          slack=cfg.stabilization_tol)
                if rec is not None and _within_upper(rec[0], upper, width):
                    lam, u, res = self.refine_vector(*rec)
                    vectors = self.normalize_vectors([u], lam, residual=res)
                    pair = EigenPair(lam=float(lam), vectors=vectors,
                                     multiplicity=len(vectors),
                                     recovered=True, residual=float(res),
                                     paired=False)
                    diag.update(outcome="recovered", order=out.order,
                                recovered=True)
                    self._finish(diag, t0)
                    return "pair", pair, diag
            if out.exhausted:
                if witness:
                    pair = self._certify_witness(witness, inequalities, label)
                    if pair is not None:
                        diag.update(outcome="witness", order=out.order)
                        self._finish(diag, t0)
                        return "pair", pair, diag
                diag.update(outcome="exhausted", order=out.order)
                self.warn(f"{label}: no eigenvalue could be certified up to "
                          f"relaxation order {self.max_order}")
                self._finish(diag, t0)
                return "abort", None, diag
            start = out.order + 1

    def _certify_witness(self, witness: list, inequalities, label: str):
        """Promote a gap-probe witness to the next eigenpair, but only after
        certifying that the band between it and the cut holds nothing larger.

        The direct maximization can degenerate when the feasible slice is a
        finite point set (the moment body then has no interior), while the
        emptiness of the band above the witness is still certifiable by an
        infeasibility ray.  Atoms extracted from a band relaxation count only
        when they polish to an eigenpair genuinely inside the band; such a
        pair supersedes the witness, anything else merely escalates the
        order.
        """
        f = self.system.f
        lam_w = float(np.mean([item[0] for item in witness]))
        sep = max(1e-8 * (1.0 + abs(lam_w)),
                  100.0 * max(item[2] for item in witness))
        band = list(inequalities)
        band.append(f.add_constant(-(lam_w + sep)))
        start = None
        while True:
            out = self.ladder(f, "max", band, stop_on_stable=False,
                              start_order=start)
            if out.kind == "infeasible":
                self.warn(f"{label}: maximization degenerated; fell back to "
                          f"the gap-probe witness at {lam_w:.12g} after "
                          "certifying the band above it empty")
                return self.build_pair(witness)
            if out.kind == "atoms":
                for group in self.verify_atoms(out.atoms):
                    u0 = group[0][1]
                    if all(q.evaluate(u0) >= -1e-6 for q in band):
                        self.warn(f"{label}: maximization degenerated, but "
                                  "a band relaxation exposed the eigenvalue "
                                  f"{group[0][0]:.12g} above the gap-probe "
                                  "witness")
                        return self.build_pair(group)
                if not out.exhausted:
                    start = out.order + 1
                    continue
            return None

    # ----------------------------------------------------------- gap probe

    def gap_probe(self, lam_k: float, inequalities, *, label: str,
                  lam_residual: float = 0.0):
        """Shrink the exclusion width until the window just below the current
        eigenvalue provably contains no other eigenvalue.

        A probe minimizes the constrained objective over the slice of the
        variety at or above the tentative cut.  Verified atoms pin the band
        minimum exactly, so a smaller polished value witnesses an in-gap
        eigenvalue; a bare relaxation value only bounds the minimum from
        below, so it can certify the window empty but never witness anything.

        Returns (delta, witness, diag); delta is None when the gap could
        not be certified or the width underflowed, meaning nearby eigenvalues
        cannot be separated at working precision.  ``witness`` carries the
        verified eigenpairs of the deepest in-gap eigenvalue met while
        shrinking (the candidate for the next step), or [].
        """
        cfg = self.config
        t0 = time.perf_counter()
        f = self.system.f
        diag: dict = {"step": label, "probes": []}
        delta = cfg.delta0
        witness: list = []
        while delta > DELTA_FLOOR:
            ineqs = list(inequalities)
            ineqs.append(f.add_constant(-(lam_k - delta)))
            probe = self._probe_min(ineqs, lam_k, delta, lam_residual, label)
            if probe is None:
                self.warn(f"{label}: probe relaxations were inconclusive; "
                          "the gap below the current eigenvalue is "
                          "uncertified")
                diag["delta_final"] = None
                self._finish(diag, t0)
                return None, witness, diag
            chi, tol, group = probe
            diag["probes"].append({"delta": delta, "chi": chi})
            if chi >= lam_k - tol:
                diag["delta_final"] = delta
                self._finish(diag, t0)
                return delta, witness, diag
            if group:
                witness = group
            delta = min(delta / cfg.delta_shrink, lam_k - chi)
        self.warn(f"{label}: exclusion width underflowed below "
                  f"{DELTA_FLOOR:g}; eigenvalues near {lam_k:.12g} are not "
                  "separable at working precision")
        diag["delta_final"] = None
        self._finish(diag, t0)
        return None, witness, diag

    def _probe_min(self, ineqs, lam_k: float, delta: float,
                   lam_residual: float, label: str
                   ) -> tuple[float, float, list] | None:
        """Certified minimum of one probe window as (value, tolerance,
        witness), or None when neither atoms nor a sufficient lower bound
        were obtained.  ``witness`` holds the verified eigenpairs attaining
        the minimum (empty when only a bare relaxation value was used)."""
        cfg = self.config
        edge = lam_k - delta
        start = None
        while True:
            out = self.ladder(self.system.f, "min", ineqs,
                              stop_on_stable=False, start_order=start)
            if out.kind == "infeasible":
                # cannot happen for a true eigenvalue; treat the window as
                # empty but leave a trace
                self.warn(f"{label}: probe window reported empty although "
                          "it contains the current eigenvalue")
                return lam_k, cfg.residual_tol, []
            if out.kind == "atoms":
                verified = []
                for u in out.atoms:
                    u = np.asarray(u, dtype=float)
                    guess = float(self.system.f.evaluate(u))
                    u2, lam2, res, ok = verify_eigenpair(
                        self.A, self.B, u, guess,
                        residual_tol=cfg.residual_tol)
                    if not ok:
                        continue
                    # polishing can slide a smeared extraction onto an
                    # eigenvalue just below the window; such points say
                    # nothing about the window itself
                    slack = max(1e-9 * (1.0 + abs(lam_k)), 100.0 * res)
                    if lam2 < edge - slack:
                        continue
                    verified.append((float(lam2), u2, float(res)))
                if verified:
                    best = min(item[0] for item in verified)
                    witness = [item for item in verified
                               if item[0] - best
                               <= 1e-8 * (1.0 + abs(best))]
                    best_res = max(item[2] for item in witness)
                    tol = max(1e-9 * (1.0 + abs(lam_k)),
                              100.0 * max(best_res, lam_residual))
                    return best, tol, witness
                if not out.exhausted:
                    start = out.order + 1
                    continue
            # At best a bare relaxation value remains, which under-estimates
            # the window minimum: good enough to certify an empty window,
            # never to witness an in-gap eigenvalue.
            if (out.value is not None
                    and out.value >= lam_k - cfg.residual_tol):
                return float(out.value), cfg.residual_tol, []
            return None


def _prepare(A: SymmetricTensor, B: SymmetricTensor | None, kind: str | None,
             config: SolverConfig | None, band, region):
    cfg = config if config is not None else SolverConfig()
    if B is None:
        k = (kind or cfg.eigen_kind or "z").lower()
        if k == "d":
            raise ValueError("d-kind needs its metric: pass "
                             "B=b_tensor('d', n, matrix=D) explicitly")
        B = b_tensor(k, A.n, m=A.m)
    else:
        k = (kind or "custom").lower()
    run = _Run(A, B, cfg)
    if k not in ("z", "h", "d"):
        run.warn("custom normalization tensor: smoothness of its unit "
                 "surface is assumed, not verified")
    n = run.system.n
    f = run.system.f
    base: list[Polynomial] = []
    if band is not None:
        lo, hi = float(band[0]), float(band[1])
        if lo > hi:
            raise ValueError("band lower bound exceeds its upper bound")
        base.append(f.add_constant(-lo))
        base.append(f.scale(-1.0).add_constant(hi))
    for q in region:
        if q.n != n:
            raise ValueError("region polynomial has the wrong number of "
                             "variables")
        base.append(q)
    if cfg.symmetry == "sorted_descending":
        for i in range(n - 1):
            term = {tuple(int(j == i) for j in range(n)): 1.0,
                    tuple(int(j == i + 1) for j in range(n)): -1.0}
            base.append(Polynomial(n, term))
        run.warn("symmetry constraints restrict output to representative "
                 "eigenvectors (coordinates sorted in decreasing order)")
    elif cfg.symmetry == "nonnegative_orthant":
        for i in range(n):
            base.append(Polynomial(n, {tuple(int(j == i)
                                             for j in range(n)): 1.0}))
        run.warn("symmetry constraints restrict output to representative "
                 "eigenvectors (nonnegative coordinates)")
    return run, tuple(base), k


def _mark_paired(run: _Run, pairs: list[EigenPair]) -> None:
    if run.sign_symmetry != "odd":
        return
    for i, p in enumerate(pairs):
        if abs(p.lam) <= 1e-8 * (1.0 + abs(p.lam)):
            p.paired = True
            continue
        for q in pairs[i + 1:]:
            if abs(p.lam + q.lam) <= 1e-7 * (1.0 + abs(p.lam)):
                p.paired = True
                q.paired = True


def all_eigenpairs(A: SymmetricTensor, B: SymmetricTensor | None = None, *,
                   kind: str | None = None,
                   config: SolverConfig | None = None,
                   band=None, region=()) -> Spectrum:
    """Compute every real eigenvalue of ``A`` (with eigenvectors) relative to
    the normalization tensor ``B``.

    ``kind`` selects a built-in normalization ("z": unit sphere; "h": unit
    m-norm surface); pass ``B`` directly for the metric ("d") or custom
    cases.  ``band=(a, b)`` restricts the computation to eigenvalues in
    [a, b]; ``region`` is a tuple of polynomials q with q(u) >= 0 imposed on
    the eigenvectors.  Returns a Spectrum whose ``complete`` flag reports
    whether the descent certifiably exhausted the (banded) spectrum.
    """
    run, base, _ = _prepare(A, B, kind, config, band, region)
    cfg = run.config
    t0 = time.perf_counter()
    f = run.system.f
    cap = cfg.max_eigenvalues or (
        2 * eigenvalue_count_bound(run.system.n, run.system.m) + 4)
    pairs: list[EigenPair] = []
    complete = False
    bottom_certificate: dict = {}

    status, pair, diag = run.eigen_step(base, label="eigenvalue 1")
    if status == "bottom":
        complete = True
        bottom_certificate = diag.get("certificate", {})
    elif status == "pair":
        pairs.append(pair)
        while len(pairs) < cap:
            k = len(pairs)
            lam_k = pairs[-1].lam
            delta, witness, _ = run.gap_probe(
                lam_k, base, label=f"gap below eigenvalue {k}",
                lam_residual=pairs[-1].residual)
            if delta is None:
                break
            cut = lam_k - delta
            ineqs = base + (f.scale(-1.0).add_constant(cut),)
            status, pair, diag = run.eigen_step(
                ineqs, upper=cut, width=delta, prev_lam=lam_k,
                witness=witness, label=f"eigenvalue {k + 1}")
            if status == "bottom":
                complete = True
                bottom_certificate = diag.get("certificate", {})
                break
            if status == "abort":
                break
            separation = max(1e-8 * (1.0 + abs(lam_k)),
                             10.0 * max(pair.residual, pairs[-1].residual))
            if pair.lam >= lam_k - separation:
                run.warn(f"descent stalled: candidate {pair.lam:.12g} does "
                         f"not lie strictly below {lam_k:.12g}")
                break
            pairs.append(pair)
        else:
            run.warn(f"stopped after {cap} eigenvalues (safety cap); the "
                     "spectrum may be truncated")

    _mark_paired(run, pairs)
    diagnostics = {
        "n": run.system.n,
        "m": run.system.m,
        "m_prime": run.system.m_prime,
        "base_order": run.system.base_order,
        "max_order": run.max_order,
        "count_bound": eigenvalue_count_bound(run.system.n, run.system.m),
        "sign_symmetry": run.sign_symmetry,
        "steps": run.steps,
        "sdp_solves": run.solves,
        "sdp_iterations": run.iterations,
        "bottom_certificate": bottom_certificate,
        "seconds": time.perf_counter() - t0,
    }
    return Spectrum(pairs=pairs, complete=complete,
                    warnings=list(run.warnings), diagnostics=diagnostics)


def constrained_eigenvalues(A: SymmetricTensor, band,
                            B: SymmetricTensor | None = None, *,
                            kind: str | None = None,
                            config: SolverConfig | None = None,
                            region=()) -> Spectrum:
    """Spectrum restricted to the closed interval ``band = (a, b)``."""
    return all_eigenpairs(A, B, kind=kind, config=config, band=band,
                          region=region)


def largest_eigenvalue(A: SymmetricTensor, B: SymmetricTensor | None = None,
                       *, kind: str | None = None,
                       config: SolverConfig | None = None):
    """The largest eigenvalue with its eigenvectors and step diagnostics.

    Raises RuntimeError when no eigenvalue could be certified within the
    order budget (there is no silent partial answer).
    """
    run, base, _ = _prepare(A, B, kind, config, None, ())
    status, pair, diag = run.eigen_step(base, label="eigenvalue 1")
    if status == "bottom":
        raise RuntimeError("the critical variety is empty: the relaxation "
                           "was certified infeasible")
    if status == "abort" or pair is None:
        raise RuntimeError("no eigenvalue could be certified within the "
                           f"order budget; warnings: {run.warnings}")
    info = {"step": diag, "warnings": list(run.warnings),
            "recovered": pair.recovered}
    return pair.lam, pair.vectors, info
