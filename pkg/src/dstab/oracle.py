"""Independent brute-force verification layer.

Everything here deliberately avoids the moment machinery so it can serve as
a cross-check: a small dense eigensolver (Householder Hessenberg reduction
followed by explicitly shifted QR with 2x2 deflation, so complex pairs of
real matrices appear without complex arithmetic until extraction), a
deterministic grid search for uncertainty values whose spectrum enters the
instability region, and a finite LP over atomic measures solved by a dense
two-phase simplex with Bland's rule.  Grid search provides lower-bound
semantics only: a grid can miss thin violation sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import DStabilityProblem, delta_box_bounds, is_box
from .sets import Relation

EIG_RESIDUAL_TOL = 1e-8
VIOLATION_MEMBERSHIP_TOL = 1e-9


class OracleError(RuntimeError):
    pass


class EigenConvergenceError(OracleError):
    """QR iteration hit its sweep cap without deflating everything."""


class AtomicLPInfeasible(OracleError):
    """No atomic measure on the supplied grid satisfies the moment
    constraints; the caller should refine the grid."""


# ----------------------------------------------------------------------
# Dense eigensolver.

def _hessenberg(a: np.ndarray) -> np.ndarray:
    h = a.copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += norm_x if x[0] >= 0 else -norm_x
        v_norm = np.linalg.norm(v)
        if v_norm == 0.0:
            continue
        v = v / v_norm
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _eig_2x2(block: np.ndarray) -> list[complex]:
    trace = block[0, 0] + block[1, 1]
    det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        root = np.sqrt(disc)
        # avoid cancellation: compute the larger-magnitude root first
        if trace >= 0:
            lam1 = (trace + root) / 2.0
        else:
            lam1 = (trace - root) / 2.0
        lam2 = det / lam1 if lam1 != 0.0 else (trace - np.sign(trace + 1.0) * root) / 2.0
        return [complex(lam1), complex(lam2)]
    root = np.sqrt(-disc) / 2.0
    return [complex(trace / 2.0, root), complex(trace / 2.0, -root)]


def eigenvalues(matrix, max_sweeps_per_block: int = 80) -> np.ndarray:
    """All eigenvalues of a real square matrix (n <= 64), sorted by
    (real, imag).  Raises EigenConvergenceError instead of returning silent
    garbage when the QR iteration fails to deflate."""
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise OracleError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n > 64:
        raise OracleError("dense oracle eigensolver is limited to n <= 64")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([complex(a[0, 0])])

    eps = np.finfo(float).eps
    tiny = eps * max(np.abs(a).sum(), 1.0)
    h = _hessenberg(a)
    eigs: list[complex] = []
    hi = n - 1
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(h[0, 0]))
            break
        for k in range(1, hi + 1):
            if abs(h[k, k - 1]) <= eps * (abs(h[k - 1, k - 1]) + abs(h[k, k])) + tiny:
                h[k, k - 1] = 0.0
        lo = hi
        while lo > 0 and h[lo, lo - 1] != 0.0:
            lo -= 1
        if lo == hi:
            eigs.append(complex(h[hi, hi]))
            hi -= 1
            sweeps = 0
            continue
        if lo == hi - 1:
            eigs.extend(_eig_2x2(h[lo:hi + 1, lo:hi + 1]))
            hi -= 2
            sweeps = 0
            continue

        sweeps += 1
        if sweeps > max_sweeps_per_block:
            raise EigenConvergenceError(
                f"QR iteration did not converge on a block of size {hi - lo + 1}"
            )
        block = h[lo:hi + 1, lo:hi + 1]
        m = block.shape[0]
        t22 = block[m - 2:, m - 2:]
        trace = t22[0, 0] + t22[1, 1]
        det = t22[0, 0] * t22[1, 1] - t22[0, 1] * t22[1, 0]
        disc = trace * trace - 4.0 * det
        if sweeps % 12 == 0:
            # exceptional shift to break symmetric stalls
            shift = abs(block[m - 1, m - 2]) + abs(block[m - 2, m - 3])
            q, r = np.linalg.qr(block - shift * np.eye(m))
            block = r @ q + shift * np.eye(m)
        elif disc >= 0.0:
            # Wilkinson: the real trailing eigenvalue closer to the corner
            root = np.sqrt(disc)
            cand = [(trace + root) / 2.0, (trace - root) / 2.0]
            shift = min(cand, key=lambda lam: abs(lam - block[m - 1, m - 1]))
            q, r = np.linalg.qr(block - shift * np.eye(m))
            block = r @ q + shift * np.eye(m)
        else:
            # complex pair: explicit double shift stays in real arithmetic
            m2 = block @ block - trace * block + det * np.eye(m)
            q, _r = np.linalg.qr(m2)
            block = _hessenberg(q.T @ block @ q)
        h[lo:hi + 1, lo:hi + 1] = block
    order = np.lexsort((np.imag(eigs), np.real(eigs)))
    return np.asarray(eigs, dtype=complex)[order]


def unit_eigenvector(matrix, lam: complex) -> tuple[np.ndarray, float]:
    """Unit eigenvector for an (approximate) eigenvalue via the smallest
    singular vector of M - lam*I, with its residual ||(M - lam I) v||."""
    a = np.asarray(matrix, dtype=float)
    shifted = a.astype(complex) - lam * np.eye(a.shape[0])
    _u, _s, vh = np.linalg.svd(shifted)
    v = vh[-1].conj()
    residual = float(np.linalg.norm(shifted @ v))
    return v, residual


# ----------------------------------------------------------------------
# Grid search for spectrum violations.

@dataclass(frozen=True)
class ViolationWitness:
    """An uncertainty value whose spectrum enters the instability region."""

    rho: np.ndarray
    lam: complex
    min_region_residual: float
    eig_residual: float


def _region_depth(problem: DStabilityProblem, lam: complex, tol: float) -> float | None:
    """Depth of lam inside the instability region (None when outside):
    the smallest constraint residual, with equalities scored as -|value|."""
    point = (lam.real, lam.imag)
    depth = np.inf
    for p, rel in problem.region.region_set.constraints:
        value = p.evaluate(point)
        if rel is Relation.GE:
            if value < -tol:
                return None
            depth = min(depth, value)
        else:
            if abs(value) > tol:
                return None
            depth = min(depth, -abs(value))
    return float(depth) if np.isfinite(depth) else 0.0


def grid_points(problem: DStabilityProblem, points_per_axis: int,
                max_points: int = 200_000, seed: int = 0) -> np.ndarray:
    """Candidate uncertainty values: a uniform grid over the box part of
    Delta (membership-filtered when Delta carries extra constraints), or
    seeded rejection sampling when the full grid would be too large.

    Raises OracleError when nothing can be sampled, e.g. when equality
    constraints give Delta measure zero inside its box."""
    bounds = delta_box_bounds(problem.delta)
    if bounds is None:
        raise OracleError(
            "delta has no box bounds to sample from; pass explicit candidate points"
        )
    lower, upper = bounds
    n = len(lower)
    box_only = is_box(problem.delta)
    if points_per_axis ** n <= max_points:
        axes = [np.linspace(lower[i], upper[i], points_per_axis) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        if box_only:
            return pts
        keep = [p for p in pts if problem.delta.contains(p, 1e-9)]
        pts = np.array(keep) if keep else np.zeros((0, n))
    else:
        # Rejection sampling against the membership test (seeded).
        rng = np.random.default_rng(seed)
        accepted = []
        for _ in range(max_points * 20):
            candidate = rng.uniform(lower, upper)
            if problem.delta.contains(candidate, 1e-9):
                accepted.append(candidate)
                if len(accepted) >= max_points:
                    break
        pts = np.array(accepted) if accepted else np.zeros((0, n))
    if len(pts) == 0:
        raise OracleError(
            "no grid point satisfies the delta constraints; the support is "
            "likely measure-zero (equality constraints) - pass explicit points"
        )
    return pts


def grid_violation_search(
    problem: DStabilityProblem,
    points_per_axis: int,
    membership_tol: float = 1e-6,
    extra_points=None,
    max_points: int = 200_000,
    seed: int = 0,
) -> ViolationWitness | None:
    """Scan a deterministic grid over Delta (rejection sampling when Delta
    is not a box), compute every spectrum, and return the deepest witness
    of an eigenvalue inside the instability region, or None.

    Ties are broken toward the earliest candidate, so results do not depend
    on evaluation order.  A returned witness has an eigenpair residual of
    at most EIG_RESIDUAL_TOL; finding one proves that the worst-case
    violation probability is 1 in the support-only setting.
    """
    try:
        candidates = list(grid_points(problem, points_per_axis, max_points, seed))
    except OracleError:
        if extra_points is None:
            raise
        candidates = []
    if extra_points is not None:
        for point in extra_points:
            point = np.asarray(point, dtype=float)
            if problem.delta.contains(point, 1e-9):
                candidates.append(point)

    best: ViolationWitness | None = None
    matrix = problem.matrix
    for rho in candidates:
        a = matrix.evaluate(rho)
        for lam in eigenvalues(a):
            depth = _region_depth(problem, lam, membership_tol)
            if depth is None:
                continue
            _v, residual = unit_eigenvector(a, lam)
            if residual > EIG_RESIDUAL_TOL * max(1.0, np.abs(a).max()):
                continue
            if best is None or depth > best.min_region_residual:
                best = ViolationWitness(
                    rho=np.array(rho), lam=complex(lam),
                    min_region_residual=depth, eig_residual=residual,
                )
    return best


# ----------------------------------------------------------------------
# Dense two-phase simplex (Bland's rule, deterministic).

_SIMPLEX_TOL = 1e-9


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and tableau[r, col] != 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _bland_iterate(tableau, basis, cost, allowed, max_iter=20000):
    """Minimize cost over the tableau with Bland's anti-cycling rule."""
    m = tableau.shape[0]
    for _ in range(max_iter):
        reduced = cost - cost[basis] @ tableau[:, :-1]
        entering = -1
        for j in range(len(cost)):
            if allowed[j] and reduced[j] < -_SIMPLEX_TOL:
                entering = j
                break
        if entering < 0:
            return
        ratios = []
        for r in range(m):
            if tableau[r, entering] > _SIMPLEX_TOL:
                ratios.append((tableau[r, -1] / tableau[r, entering], basis[r], r))
        if not ratios:
            raise OracleError("LP is unbounded")
        # smallest ratio, ties by smallest basis index (Bland)
        ratios.sort(key=lambda t: (t[0], t[1]))
        _ratio, _b, row = ratios[0]
        _pivot(tableau, basis, row, entering)
    raise OracleError("simplex iteration limit exceeded")


def simplex_maximize(c, a_eq, b_eq, a_le=None, b_le=None):
    """Maximize c.x subject to a_eq x = b_eq, a_le x <= b_le, x >= 0.

    Dense two-phase tableau simplex with Bland's rule throughout, so the
    path and the answer are deterministic.  Raises AtomicLPInfeasible when
    the constraints admit no feasible point.
    """
    c = np.asarray(c, dtype=float)
    a_eq = np.asarray(a_eq, dtype=float).reshape(-1, len(c))
    b_eq = np.asarray(b_eq, dtype=float)
    if a_le is None:
        a_le = np.zeros((0, len(c)))
        b_le = np.zeros(0)
    a_le = np.asarray(a_le, dtype=float).reshape(-1, len(c))
    b_le = np.asarray(b_le, dtype=float)

    n = len(c)
    n_slack = a_le.shape[0]
    rows = np.vstack([
        np.hstack([a_eq, np.zeros((a_eq.shape[0], n_slack))]),
        np.hstack([a_le, np.eye(n_slack)]),
    ])
    rhs = np.concatenate([b_eq, b_le])
    m = rows.shape[0]
    flip = rhs < 0
    rows[flip] *= -1.0
    rhs = np.abs(rhs)

    # initial basis: slack columns where usable, artificials elsewhere
    basis = [-1] * m
    for r in range(a_eq.shape[0], m):
        col = n + (r - a_eq.shape[0])
        if rows[r, col] > 0:
            basis[r] = col
    art_cols = []
    for r in range(m):
        if basis[r] < 0:
            art_cols.append(rows.shape[1] + len(art_cols))
            basis[r] = art_cols[-1]
    width = n + n_slack + len(art_cols)
    tableau = np.zeros((m, width + 1))
    tableau[:, :n + n_slack] = rows
    for k, r in enumerate([r for r in range(m) if basis[r] >= n + n_slack]):
        tableau[r, n + n_slack + k] = 1.0
    tableau[:, -1] = rhs

    if art_cols:
        phase1 = np.zeros(width)
        phase1[n + n_slack:] = 1.0
        allowed = np.ones(width, dtype=bool)
        _bland_iterate(tableau, basis, phase1, allowed)
        if phase1[basis] @ tableau[:, -1] > 1e-7:
            raise AtomicLPInfeasible("moment constraints unsatisfiable on this grid")
        # drive any degenerate artificial out of the basis when possible
        for r in range(m):
            if basis[r] >= n + n_slack:
                for j in range(n + n_slack):
                    if abs(tableau[r, j]) > _SIMPLEX_TOL:
                        _pivot(tableau, basis, r, j)
                        break

    cost = np.zeros(width)
    cost[:n] = -c  # minimize -c.x
    allowed = np.ones(width, dtype=bool)
    allowed[n + n_slack:] = False
    _bland_iterate(tableau, basis, cost, allowed)

    x = np.zeros(width)
    for r in range(m):
        x[basis[r]] = tableau[r, -1]
    if any(basis[r] >= n + n_slack and tableau[r, -1] > 1e-7 for r in range(m)):
        raise AtomicLPInfeasible("moment constraints unsatisfiable on this grid")
    return x[:n], float(c @ x[:n])


# ----------------------------------------------------------------------
# Atomic-measure lower bound.

@dataclass(frozen=True)
class AtomicLPResult:
    """Best atomic measure on a fixed grid: a valid lower bound on the
    worst-case violation probability."""

    atoms: np.ndarray
    weights: np.ndarray
    lower_bound: float
    violating: np.ndarray  # boolean mask per atom


def atomic_lp_bound(
    problem: DStabilityProblem,
    atoms,
    membership_tol: float = VIOLATION_MEMBERSHIP_TOL,
) -> AtomicLPResult:
    """Maximize the probability mass on violating atoms over all atomic
    measures supported on the given grid that satisfy the moment
    constraints.  Any feasible atomic measure is admissible for the moment
    problem, so the optimum is a true lower bound on the violation
    probability."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    n_rho = len(problem.uncertainty_variables)
    if atoms.shape[1] != n_rho:
        raise OracleError(
            f"atoms have dimension {atoms.shape[1]}, expected {n_rho}"
        )
    for atom in atoms:
        if not problem.delta.contains(atom, 1e-9):
            raise OracleError(f"atom {atom} lies outside the uncertainty support")

    violating = np.zeros(len(atoms), dtype=bool)
    for k, atom in enumerate(atoms):
        spectrum = eigenvalues(problem.matrix.evaluate(atom))
        violating[k] = any(
            _region_depth(problem, lam, membership_tol) is not None
            for lam in spectrum
        )

    objective = violating.astype(float)
    a_eq = [np.ones(len(atoms))]
    b_eq = [1.0]
    a_le = []
    b_le = []
    for mc in problem.moment_constraints:
        row = np.array([mc.f.evaluate(atom) for atom in atoms])
        if mc.relation == "=":
            a_eq.append(row)
            b_eq.append(mc.target)
        elif mc.relation == "<=":
            a_le.append(row)
            b_le.append(mc.target)
        else:
            a_le.append(-row)
            b_le.append(-mc.target)

    weights, value = simplex_maximize(objective, a_eq, b_eq, a_le or None, b_le or None)
    return AtomicLPResult(
        atoms=atoms, weights=weights, lower_bound=float(value), violating=violating
    )
