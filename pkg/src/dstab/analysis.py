"""User-facing driver: violation-probability bounds, robustness
certificates, hierarchy sweeps, candidate extraction, parameter sweeps and
bisection on a robustness margin.

The central quantity is the order-tau relaxation optimum ("raw value"), an
upper bound on the worst-case probability that the spectrum enters the
instability region.  Its clip to [0, 1] is reported as p_upper; 1 - p_upper
lower-bounds the probability of D-stability.  In the support-only setting
the true value is 0 or 1, so raw < 1 (with a safety margin) certifies
robust D-stability outright.
"""

from __future__ import annotations

import csv
import enum
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .problem import DStabilityProblem, LiftedProblem, build_lifted, minimal_order
from .relax import SDPSolution, SolverStatus, assemble_relaxation
from .sdp import SolverSettings, solve
from .sets import Relation

DEFAULT_CERTIFICATION_MARGIN = 1e-3


class Verdict(enum.Enum):
    CERTIFIED_ROBUSTLY_DSTABLE = "CertifiedRobustlyDStable"
    VIOLATION_PROBABILITY_BOUND = "ViolationProbabilityBound"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CandidatePoint:
    """First-order-moment estimate of the worst-case point.

    `max_support_violation` is the largest violation of the lifted support
    constraints at the candidate; `objective_gap` is the mismatch between
    the measure's objective value and the objective at the candidate, which
    vanishes exactly when the optimal measure is a single atom.  Either one
    being large flags a mixture, for which the coordinate estimates are
    only averages."""

    rho: np.ndarray
    lam: complex
    x: np.ndarray
    max_support_violation: float
    objective_gap: float


@dataclass(frozen=True)
class AnalysisReport:
    tau: int
    raw_value: float
    p_upper: float
    p_lower_stability: float
    verdict: Verdict
    candidate: CandidatePoint | None
    solver_status: SolverStatus
    residuals: dict
    iterations: int
    seconds: float
    num_moments: int
    support_only: bool


@dataclass(frozen=True)
class HierarchyReport:
    reports: tuple[AnalysisReport, ...]
    monotonicity_violations: tuple[tuple[int, float, float], ...]

    def raw_values(self) -> list[float]:
        return [r.raw_value for r in self.reports]


@dataclass(frozen=True)
class CertificationResult:
    certified: bool
    raw_value: float
    margin: float
    report: AnalysisReport

    @property
    def label(self) -> str:
        return "CertifiedRobustlyDStable" if self.certified else "NotCertified"


@dataclass(frozen=True)
class BisectionResult:
    k_star: float
    evaluations: tuple[tuple[float, bool, float], ...]  # (k, certified, raw)


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    p_upper: float
    p_lower: float
    status: str
    tau: int
    seconds: float


def extract_candidate(solution: SDPSolution, lifted: LiftedProblem) -> CandidatePoint:
    """Read the first-order moments as coordinate estimates of the
    worst-case point and score them against the support constraints."""
    first = np.zeros(lifted.num_vars)
    for i in range(lifted.num_vars):
        alpha = tuple(1 if j == i else 0 for j in range(lifted.num_vars))
        first[i] = solution.moments.entry(alpha)
    rho = first[list(lifted.rho_indices)]
    lam_re = first[lifted.lambda_indices[0]]
    lam_im = first[lifted.lambda_indices[1]] if len(lifted.lambda_indices) > 1 else 0.0
    xs = first[list(lifted.x_indices)]
    if lifted.real_mode:
        x = xs.astype(complex)
    else:
        n_a = lifted.matrix_size
        x = xs[:n_a] + 1j * xs[n_a:]
    worst = 0.0
    for p, rel in lifted.support.constraints:
        value = p.evaluate(first)
        violation = abs(value) if rel is Relation.EQ else max(0.0, -value)
        worst = max(worst, violation)
    gap = abs(solution.primal_value - lifted.objective.evaluate(first))
    return CandidatePoint(
        rho=rho, lam=complex(lam_re, lam_im), x=x,
        max_support_violation=worst, objective_gap=gap,
    )


def upper_probability(
    problem: DStabilityProblem,
    tau: int | None = None,
    settings: SolverSettings | None = None,
    margin: float = DEFAULT_CERTIFICATION_MARGIN,
    equality_encoding: str = "pair",
) -> AnalysisReport:
    """Solve the order-tau relaxation and report the violation-probability
    bound with the verdict dictated by the available information.

    Support-only problems with raw < 1 - margin are certified robustly
    D-stable (the exact value is then 0); with moment information the raw
    value itself is the probability bound.  A solver status other than
    Optimal yields Inconclusive with diagnostics attached.
    """
    start = time.perf_counter()
    lifted = build_lifted(problem)
    tau_min = minimal_order(lifted)
    if tau is None:
        tau = tau_min
    elif tau < tau_min:
        warnings.warn(
            f"relaxation order {tau} below the minimal order {tau_min}; using {tau_min}",
            stacklevel=2,
        )
        tau = tau_min
    sdp = assemble_relaxation(lifted, tau, equality_encoding=equality_encoding)
    solution = solve(sdp, settings)
    seconds = time.perf_counter() - start

    raw = solution.primal_value
    p_upper = min(1.0, max(0.0, raw))
    support_only = problem.is_support_only()
    candidate = None
    if solution.status is SolverStatus.OPTIMAL:
        candidate = extract_candidate(solution, lifted)
        if support_only:
            if raw < 1.0 - margin:
                verdict = Verdict.CERTIFIED_ROBUSTLY_DSTABLE
            else:
                verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.VIOLATION_PROBABILITY_BOUND
    else:
        verdict = Verdict.INCONCLUSIVE

    return AnalysisReport(
        tau=tau,
        raw_value=raw,
        p_upper=p_upper,
        p_lower_stability=1.0 - p_upper,
        verdict=verdict,
        candidate=candidate,
        solver_status=solution.status,
        residuals=dict(solution.residuals),
        iterations=solution.iterations,
        seconds=seconds,
        num_moments=sdp.num_moments,
        support_only=support_only,
    )


def certify_robust(
    problem: DStabilityProblem,
    tau: int | None = None,
    margin: float = DEFAULT_CERTIFICATION_MARGIN,
    settings: SolverSettings | None = None,
) -> CertificationResult:
    """Robust D-stability certificate for a support-only problem: certified
    iff the relaxation value stays below 1 by the given margin."""
    if not problem.is_support_only():
        raise ValueError(
            "certification applies to support-only problems; drop the moment "
            "constraints or use upper_probability"
        )
    report = upper_probability(problem, tau=tau, settings=settings, margin=margin)
    certified = (
        report.solver_status is SolverStatus.OPTIMAL
        and report.raw_value < 1.0 - margin
    )
    return CertificationResult(
        certified=certified, raw_value=report.raw_value, margin=margin, report=report
    )


def hierarchy(
    problem: DStabilityProblem,
    tau_min: int,
    tau_max: int,
    settings: SolverSettings | None = None,
    margin: float = DEFAULT_CERTIFICATION_MARGIN,
    monotonicity_slack: float = 1e-6,
) -> HierarchyReport:
    """Solve the relaxation at each order in [tau_min, tau_max]; the raw
    values must be nonincreasing up to solver accuracy, and any increase
    beyond the slack is flagged as an anomaly."""
    reports = []
    for tau in range(tau_min, tau_max + 1):
        reports.append(upper_probability(problem, tau=tau, settings=settings, margin=margin))
    violations = []
    for prev, nxt in zip(reports, reports[1:]):
        if nxt.raw_value > prev.raw_value + monotonicity_slack:
            violations.append((nxt.tau, prev.raw_value, nxt.raw_value))
    return HierarchyReport(reports=tuple(reports), monotonicity_violations=tuple(violations))


def bisect_margin(
    family,
    k_lo: float,
    k_hi: float,
    tau: int | None = None,
    tol: float = 1e-3,
    margin: float = DEFAULT_CERTIFICATION_MARGIN,
    settings: SolverSettings | None = None,
) -> BisectionResult:
    """Largest parameter k (within tol) whose problem family(k) is still
    certified robustly D-stable.

    Requires certification to hold at k_lo; when it also holds at k_hi the
    whole bracket is certified and k_hi is returned.  Certification is
    assumed monotone in k; non-monotone families are the caller's
    responsibility.
    """
    evaluations = []

    def certified_at(k: float) -> bool:
        result = certify_robust(family(k), tau=tau, margin=margin, settings=settings)
        evaluations.append((k, result.certified, result.raw_value))
        return result.certified

    if certified_at(k_hi):
        return BisectionResult(k_star=k_hi, evaluations=tuple(evaluations))
    if not certified_at(k_lo):
        raise ValueError(
            f"bisection bracket invalid: certification already fails at k_lo={k_lo}"
        )
    lo, hi = k_lo, k_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if certified_at(mid):
            lo = mid
        else:
            hi = mid
    return BisectionResult(k_star=lo, evaluations=tuple(evaluations))


def sweep(
    family,
    grid,
    tau: int | None = None,
    settings: SolverSettings | None = None,
    margin: float = DEFAULT_CERTIFICATION_MARGIN,
) -> list[SweepPoint]:
    """One analysis per grid value of the sweep parameter; per-point
    failures are recorded in the status column and the sweep continues."""
    points = []
    for theta in grid:
        start = time.perf_counter()
        try:
            report = upper_probability(family(theta), tau=tau, settings=settings, margin=margin)
            points.append(
                SweepPoint(
                    theta=float(theta),
                    p_upper=report.p_upper,
                    p_lower=report.p_lower_stability,
                    status=report.solver_status.value,
                    tau=report.tau,
                    seconds=report.seconds,
                )
            )
        except Exception as err:  # per-point failure: record and continue
            points.append(
                SweepPoint(
                    theta=float(theta),
                    p_upper=float("nan"),
                    p_lower=float("nan"),
                    status=f"error: {err}",
                    tau=-1 if tau is None else tau,
                    seconds=time.perf_counter() - start,
                )
            )
    return points


SWEEP_CSV_HEADER = ("theta", "p_upper", "p_lower", "status", "tau", "seconds")


def write_sweep_csv(points, path) -> None:
    """Deterministic CSV emission, rows in grid order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_CSV_HEADER)
        for p in points:
            writer.writerow(
                [f"{p.theta:.9g}", f"{p.p_upper:.9g}", f"{p.p_lower:.9g}",
                 p.status, p.tau, f"{p.seconds:.9g}"]
            )
