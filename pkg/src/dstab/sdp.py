"""Dense primal-dual interior-point solver for moment-form SDPs.

The solver works on the internal minimization form

    min  c . y     s.t.   G y = g,    S_b = A_b(y)  PSD  for each block b,

where y stacks the (scaled) moment variables and one nonnegative slack per
one-sided linear constraint (each slack carries its own 1x1 PSD block).
The engine's maximization objective is negated on entry and the reported
values are mapped back, so `primal_value` is the relaxation optimum and
`dual_value` the corresponding weak-duality upper bound.

Algorithm: infeasible-start path following in the Nesterov-Todd scaling.
Each iteration linearizes the centering condition X = sigma*mu*S^-1 with
the symmetric operator V(.)V (V the inverse NT scaling point, so the Newton
direction satisfies the linearized equations exactly and the Schur
complement tr(A_i V A_j V) is symmetric positive definite), takes an
affine predictor step to pick the centering weight sigma by Mehrotra's
rule, then recomputes the corrected direction; steps use a
fraction-to-boundary rule.  Everything is plain deterministic numpy: fixed
summation order, no randomization, so identical inputs produce identical
iterates.  Numerical breakdown (a Schur complement that loses positive
definiteness, or a vanishing step) is reported as SlowProgress together
with the best iterate seen; it never raises.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .moments import MomentVector
from .relax import SDPProblem, SDPSolution, SolverStatus


@dataclass(frozen=True)
class SolverSettings:
    """Interior-point knobs; the defaults suit desk-scale moment SDPs.

    `infeasibility_threshold` is the certificate-quality ratio (normalized
    dual-ray objective over dual-ray residual) above which the problem is
    reported infeasible; the test is a heuristic, not a proof.
    """

    max_iterations: int = 200
    feasibility_tol: float = 1e-8
    gap_tol: float = 1e-8
    step_fraction: float = 0.98
    initial_scale: float = 1.0
    infeasibility_threshold: float = 1e5
    log_iterations: bool = False
    log_stream: object = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (0.0 < self.step_fraction < 1.0):
            raise ValueError("step_fraction must lie in (0, 1)")
        for name in ("feasibility_tol", "gap_tol", "initial_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class _Block:
    """One PSD block A_b(y) with precompiled sparse pencil structure."""

    __slots__ = ("dim", "vars", "pencil", "var_pos", "rows", "cols", "vals",
                 "starts", "global_vars")

    def __init__(self, dim: int, var_idx, rows, cols, vals):
        self.dim = dim
        var_idx = np.asarray(var_idx, dtype=np.intp)
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        vals = np.asarray(vals, dtype=float)
        order = np.lexsort((cols, rows, var_idx))
        var_idx = var_idx[order]
        self.rows = rows[order]
        self.cols = cols[order]
        self.vals = vals[order]
        self.vars, self.var_pos = np.unique(var_idx, return_inverse=True)
        self.global_vars = var_idx
        self.starts = np.searchsorted(self.var_pos, np.arange(len(self.vars) + 1))
        flat = self.rows * dim + self.cols
        # pencil: (dim^2 x nvars) sparse matrix with column i = vec(A_{b,i})
        self.pencil = sp.csr_matrix(
            (self.vals, (flat, self.var_pos)), shape=(dim * dim, len(self.vars))
        )
        self.pencil.sum_duplicates()

    def negates(self, other: "_Block") -> bool:
        """True when other's pencil is the exact negation of this one."""
        return (
            self.dim == other.dim
            and len(self.vals) == len(other.vals)
            and np.array_equal(self.global_vars, other.global_vars)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, -other.vals)
        )

    def assemble(self, y: np.ndarray) -> np.ndarray:
        flat = self.pencil @ y[self.vars]
        return flat.reshape(self.dim, self.dim)

    def adjoint_into(self, w: np.ndarray, out: np.ndarray) -> None:
        """out[vars] += A_b^*(w) for a dense symmetric w."""
        out[self.vars] += self.pencil.T @ w.ravel()

    def schur_into(self, h: np.ndarray, s_inv: np.ndarray, x: np.ndarray) -> None:
        """h += the HKM Schur contribution tr(A_i S^-1 A_j X)."""
        k = self.dim
        nv = len(self.vars)
        if k == 1:
            scale = float(s_inv[0, 0] * x[0, 0])
            coeffs = np.zeros(nv)
            np.add.at(coeffs, self.var_pos, self.vals)
            h[np.ix_(self.vars, self.vars)] += scale * np.outer(coeffs, coeffs)
            return
        chunk = max(1, min(nv, int(2.0e6 // (k * k)) or 1))
        for a in range(0, nv, chunk):
            b = min(a + chunk, nv)
            lo, hi = self.starts[a], self.starts[b]
            t = np.zeros((b - a, k, k))
            np.add.at(
                t,
                (self.var_pos[lo:hi] - a, self.rows[lo:hi], self.cols[lo:hi]),
                self.vals[lo:hi],
            )
            g = np.matmul(s_inv, np.matmul(t, x))
            h_rows = (self.pencil.T @ g.reshape(b - a, k * k).T).T
            h[np.ix_(self.vars[a:b], self.vars)] += h_rows


def _compile_blocks(sdp: SDPProblem):
    """Lower the SDP into solver arrays: objective, equality rows with
    slacks for one-sided constraints, and compiled PSD blocks."""
    n_m = sdp.num_moments
    slack_rows = [i for i, row in enumerate(sdp.constraints) if row.relation != "="]
    n_slack = len(slack_rows)
    n_y = n_m + n_slack

    c = np.zeros(n_y)
    c[:n_m] = -sdp.objective  # engine maximizes; solver minimizes

    g_rows = []
    g_rhs = []
    for i, row in enumerate(sdp.constraints):
        coeffs = np.zeros(n_y)
        coeffs[:n_m] = row.coeffs
        if row.relation == "<=":
            coeffs[n_m + slack_rows.index(i)] = 1.0
        elif row.relation == ">=":
            coeffs[n_m + slack_rows.index(i)] = -1.0
        g_rows.append(coeffs)
        g_rhs.append(row.rhs)
    g_mat = np.array(g_rows) if g_rows else np.zeros((0, n_y))
    g_vec = np.array(g_rhs)

    psd_blocks = []
    for _label, form in sdp.psd_blocks:
        var_idx, rows, cols, vals = [], [], [], []
        for alpha, r, cc, v in form.terms:
            idx = sdp.basis.index(alpha)
            var_idx.append(np.full(len(v), idx, dtype=np.intp))
            rows.append(r)
            cols.append(cc)
            vals.append(v)
        psd_blocks.append(
            _Block(
                form.dimension,
                np.concatenate(var_idx),
                np.concatenate(rows),
                np.concatenate(cols),
                np.concatenate(vals),
            )
        )
    slack_blocks = [_Block(1, [n_m + k], [0], [0], [1.0]) for k in range(n_slack)]
    return c, g_mat, g_vec, psd_blocks, slack_blocks


def _pair_presolve(psd_blocks: list, n_y: int):
    """Replace each +/- pencil pair (the pair encoding of a support
    equality, whose blocks are forced singular at every feasible point) by
    the exact entrywise equations A_b(y) = 0.

    Returns the kept blocks, a reporting plan over the original block
    order, the extra equality rows (deduplicated), and per-pair entry keys
    used to rebuild a PSD dual pair from the row multipliers.
    """
    kept = []
    plan = []
    extra_rows: list[np.ndarray] = []
    row_index: dict[bytes, int] = {}
    pair_specs = []
    i = 0
    while i < len(psd_blocks):
        block = psd_blocks[i]
        if i + 1 < len(psd_blocks) and block.negates(psd_blocks[i + 1]):
            entries: dict[tuple[int, int], np.ndarray] = {}
            for var, r, cc, v in zip(block.global_vars, block.rows, block.cols, block.vals):
                if r > cc:
                    continue
                row = entries.get((int(r), int(cc)))
                if row is None:
                    row = entries[(int(r), int(cc))] = np.zeros(n_y)
                row[var] += v
            keys = []
            positions = []
            for key in sorted(entries):
                row = entries[key]
                if not row.any():
                    continue
                stamp = row.tobytes()
                pos = row_index.get(stamp)
                owner = pos is None
                if owner:
                    pos = len(extra_rows)
                    row_index[stamp] = pos
                    extra_rows.append(row)
                keys.append((key, pos, owner))
                positions.append(pos)
            plan.append(("pair+", len(pair_specs)))
            plan.append(("pair-", len(pair_specs)))
            pair_specs.append((block.dim, keys))
            i += 2
        else:
            plan.append(("direct", len(kept)))
            kept.append(block)
            i += 1
    rows = np.array(extra_rows) if extra_rows else np.zeros((0, n_y))
    return kept, plan, rows, pair_specs


def _pair_duals(pair, multipliers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split the row multipliers of an eliminated pair into PSD dual blocks
    (X_plus, X_minus) with X_plus - X_minus equal to the multiplier matrix."""
    dim, keys = pair
    omega = np.zeros((dim, dim))
    for (r, cc), pos, owner in keys:
        if not owner:
            continue
        w = multipliers[pos]
        if r == cc:
            omega[r, r] = w
        else:
            omega[r, cc] = omega[cc, r] = 0.5 * w
    lam, vec = np.linalg.eigh(omega)
    plus = (vec * np.maximum(lam, 0.0)) @ vec.T
    minus = (vec * np.maximum(-lam, 0.0)) @ vec.T
    return plus, minus


def _max_step(s: np.ndarray, ds: np.ndarray) -> float:
    """Largest t with S + t*dS PSD, via the Cholesky-whitened eigenvalues."""
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        return 0.0
    w = solve_triangular(chol, ds, lower=True, check_finite=False)
    w = solve_triangular(chol, w.T, lower=True, check_finite=False)
    lam_min = float(np.linalg.eigvalsh(0.5 * (w + w.T))[0])
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


def _is_pd(mat: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(mat)
        return True
    except np.linalg.LinAlgError:
        return False


class _SchurFactor:
    """Cholesky of the Schur complement with Jacobi scaling and escalating
    diagonal jitter; near the optimum the raw matrix spans many orders of
    magnitude and plain Cholesky gives up too early."""

    def __init__(self, h: np.ndarray):
        d = np.sqrt(np.maximum(h.diagonal(), 1e-300))
        scaled = h / np.outer(d, d)
        self.d = d
        eye = np.eye(h.shape[0])
        jitter = 0.0
        last_error = None
        for _ in range(8):
            try:
                self.fac = cho_factor(scaled + jitter * eye, check_finite=False)
                return
            except np.linalg.LinAlgError as err:
                last_error = err
                jitter = max(jitter * 100.0, 1e-14)
        raise last_error

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if rhs.ndim == 1:
            return cho_solve(self.fac, rhs / self.d, check_finite=False) / self.d
        out = cho_solve(self.fac, rhs / self.d[:, None], check_finite=False)
        return out / self.d[:, None]


_LOG_HEADER = "  iter          mu    p_infeas    d_infeas         gap  alpha_p  alpha_d"


def solve(sdp: SDPProblem, settings: SolverSettings | None = None) -> SDPSolution:
    """Solve the assembled moment SDP.

    Returns an Optimal solution when primal/dual residuals and the relative
    duality gap fall below the tolerances; Infeasible (heuristic, via a
    Farkas-style dual ray) when the dual objective diverges along a
    near-feasible ray; SlowProgress with the best iterate on numerical
    breakdown; IterLimit at the iteration cap.
    """
    settings = settings or SolverSettings()
    c, g_user, g_user_rhs, psd_raw, slack_blocks = _compile_blocks(sdp)
    n_y = len(c)
    n_m = sdp.num_moments
    n_slack = len(slack_blocks)
    n_user_rows = g_user.shape[0]

    kept, plan, pair_rows, pair_specs = _pair_presolve(psd_raw, n_y)
    g_mat = np.vstack([g_user, pair_rows]) if len(pair_rows) else g_user
    g_vec = np.concatenate([g_user_rhs, np.zeros(len(pair_rows))])
    blocks = kept + slack_blocks
    n_kept = len(kept)
    m_eq = g_mat.shape[0]
    k_total = sum(b.dim for b in blocks)

    log = settings.log_stream
    if settings.log_iterations and log is None:
        log = sys.stderr
    if log is not None:
        print(_LOG_HEADER, file=log)

    y = np.zeros(n_y)
    y[sdp.normalization_index] = 1.0
    y[n_m:] = 1.0
    nu = np.zeros(m_eq)
    eta = settings.initial_scale
    s_blocks = [eta * np.eye(b.dim) for b in blocks]
    x_blocks = [eta * np.eye(b.dim) for b in blocks]

    gamma = settings.step_fraction
    c_norm = 1.0 + (np.abs(c).max() if len(c) else 0.0)
    g_norm = 1.0 + (np.abs(g_vec).max() if len(g_vec) else 0.0)

    def adjoint(mats) -> np.ndarray:
        out = np.zeros(n_y)
        for b, w in zip(blocks, mats):
            b.adjoint_into(w, out)
        return out

    best = None
    best_score = np.inf
    best_iter = 0
    status = SolverStatus.ITER_LIMIT
    iterations = 0
    stall = 0
    ray = None

    for it in range(1, settings.max_iterations + 1):
        iterations = it
        r_link = [b.assemble(y) - s for b, s in zip(blocks, s_blocks)]
        r_g = g_vec - g_mat @ y
        r_c = c - g_mat.T @ nu - adjoint(x_blocks)
        mu = sum(float(np.tensordot(x, s)) for x, s in zip(x_blocks, s_blocks)) / k_total

        pobj = float(c @ y)
        dobj = float(g_vec @ nu)
        p_inf = max(
            (np.abs(r_g).max() if len(r_g) else 0.0) / g_norm,
            max(
                np.abs(r).max() / (1.0 + np.abs(s).max())
                for r, s in zip(r_link, s_blocks)
            ),
        )
        d_inf = np.abs(r_c).max() / c_norm
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        score = max(p_inf, d_inf, gap)
        if score < 0.99 * best_score:
            best_score = score
            best_iter = it
            best = (y.copy(), nu.copy(), [x.copy() for x in x_blocks], pobj, dobj,
                    p_inf, d_inf, it)

        if p_inf <= settings.feasibility_tol and d_inf <= settings.feasibility_tol \
                and gap <= settings.gap_tol:
            status = SolverStatus.OPTIMAL
            break

        # Heuristic infeasibility detection: the normalized dual iterate
        # (nu, X) approaches a Farkas-style ray (G' nu + A*(X) = 0 with
        # positive objective) exactly when the primal is infeasible and the
        # dual objective diverges.  Reported, not proven.
        ray_norm = np.linalg.norm(nu) + sum(np.linalg.norm(x, "fro") for x in x_blocks)
        if ray_norm > 0 and p_inf > 100.0 * settings.feasibility_tol and dobj > 0:
            ray_res = np.linalg.norm(g_mat.T @ nu + adjoint(x_blocks)) / ray_norm
            ray_obj = dobj / ray_norm
            if ray_obj >= settings.infeasibility_threshold * max(ray_res, 1e-300):
                status = SolverStatus.INFEASIBLE
                ray = {
                    "multipliers": nu[:n_user_rows] / ray_norm,
                    "psd_blocks": [x / ray_norm for x in x_blocks[:n_kept]],
                    "residual": float(ray_res),
                    "objective": float(ray_obj),
                }
                break
        if pobj < -1e12 * max(1.0, abs(dobj)):
            status = SolverStatus.UNBOUNDED
            break
        if it - best_iter > 25:
            status = SolverStatus.SLOW_PROGRESS
            break

        try:
            # NT scaling per block: V = W^-1 with W X W = S, computed from
            # S = Ls Ls', eig(Ls' X Ls) = U diag(d) U', V = Y sqrt(d) Y'
            # with Y = Ls^-T U.  Then V S V = X and the Schur complement
            # tr(A_i V A_j V) is symmetric positive definite.
            s_inv = []
            v_scale = []
            for s in s_blocks:
                k = s.shape[0]
                chol = np.linalg.cholesky(s)
                inv = cho_solve((chol, True), np.eye(k), check_finite=False)
                s_inv.append(0.5 * (inv + inv.T))
            for s, x in zip(s_blocks, x_blocks):
                chol = np.linalg.cholesky(s)
                mid = chol.T @ x @ chol
                d, u = np.linalg.eigh(0.5 * (mid + mid.T))
                if d[0] <= 0:
                    raise np.linalg.LinAlgError("NT scaling lost definiteness")
                y_mat = solve_triangular(chol, u, lower=True, trans="T",
                                         check_finite=False)
                v = (y_mat * np.sqrt(d)) @ y_mat.T
                v_scale.append(0.5 * (v + v.T))

            h = np.zeros((n_y, n_y))
            for b, v in zip(blocks, v_scale):
                b.schur_into(h, v, v)
            h = 0.5 * (h + h.T)
            h_fac = _SchurFactor(h)

            w_gt = h_fac.solve(g_mat.T)
            schur_eq = g_mat @ w_gt
            # The pair presolve can leave redundant (zero-rhs) equality
            # rows, so the small equality system is solved by a spectral
            # pseudo-inverse rather than Cholesky.
            eq_w, eq_q = np.linalg.eigh(0.5 * (schur_eq + schur_eq.T))
            cut = max(eq_w[-1], 0.0) * 1e-13
            eq_inv = np.where(eq_w > cut, 1.0 / np.where(eq_w > cut, eq_w, 1.0), 0.0)

            # The complementarity linearization is dX = C - V dS V with
            # C = sigma*mu*S^-1 - X; substituting dS = A(dy) + R_link into
            # the dual equation gives  H dy - G' dnu = A*(C - V R V) - r_c.
            vrv = [v @ r @ v for v, r in zip(v_scale, r_link)]

            def newton(comp_mats):
                rhs1 = adjoint([cm - w for cm, w in zip(comp_mats, vrv)]) - r_c
                u = h_fac.solve(rhs1)
                dnu = eq_q @ (eq_inv * (eq_q.T @ (r_g - g_mat @ u)))
                dy = u + w_gt @ dnu
                ds = [b.assemble(dy) + r for b, r in zip(blocks, r_link)]
                dx = []
                for cm, v, dsb in zip(comp_mats, v_scale, ds):
                    raw = cm - v @ dsb @ v
                    dx.append(0.5 * (raw + raw.T))
                return dy, dnu, ds, dx

            # Predictor (affine scaling, sigma = 0).
            _dy_a, _dnu_a, ds_a, dx_a = newton([-x for x in x_blocks])
            ap_a = min(1.0, gamma * min(_max_step(s, d) for s, d in zip(s_blocks, ds_a)))
            ad_a = min(1.0, gamma * min(_max_step(x, d) for x, d in zip(x_blocks, dx_a)))
            mu_aff = sum(
                float(np.tensordot(x + ad_a * dx, s + ap_a * ds))
                for x, s, dx, ds in zip(x_blocks, s_blocks, dx_a, ds_a)
            ) / k_total
            sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

            # Centering step toward sigma*mu.
            dy, dnu, ds, dx = newton(
                [sigma * mu * si - x for si, x in zip(s_inv, x_blocks)]
            )
        except np.linalg.LinAlgError:
            status = SolverStatus.SLOW_PROGRESS
            break

        alpha_p = min(1.0, gamma * min(_max_step(s, d) for s, d in zip(s_blocks, ds)))
        alpha_d = min(1.0, gamma * min(_max_step(x, d) for x, d in zip(x_blocks, dx)))

        # Commit, backing off deterministically if rounding broke definiteness.
        committed = False
        for _ in range(12):
            s_new = [0.5 * ((s + alpha_p * d) + (s + alpha_p * d).T)
                     for s, d in zip(s_blocks, ds)]
            x_new = [0.5 * ((x + alpha_d * d) + (x + alpha_d * d).T)
                     for x, d in zip(x_blocks, dx)]
            if all(_is_pd(m) for m in s_new) and all(_is_pd(m) for m in x_new):
                y = y + alpha_p * dy
                nu = nu + alpha_d * dnu
                s_blocks, x_blocks = s_new, x_new
                committed = True
                break
            alpha_p *= 0.5
            alpha_d *= 0.5
        if log is not None:
            print(
                f"{it:6d} {mu:11.4e} {p_inf:11.4e} {d_inf:11.4e} "
                f"{pobj - dobj:11.4e} {alpha_p:8.2e} {alpha_d:8.2e}",
                file=log,
            )
        if not committed or max(alpha_p, alpha_d) < 1e-10:
            stall += 1
            if stall >= 3:
                status = SolverStatus.SLOW_PROGRESS
                break
        else:
            stall = 0

    if status in (SolverStatus.SLOW_PROGRESS, SolverStatus.ITER_LIMIT) and best is not None:
        y, nu, x_blocks, pobj, dobj, p_inf, d_inf, _it = best

    moments = MomentVector(
        num_vars=sdp.n_z,
        order=sdp.tau,
        values=y[:n_m] * sdp.scale_pow,
    )

    # Reassemble dual blocks in the original block order, rebuilding PSD
    # pairs for the equality localizers eliminated by the presolve.
    pair_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    pair_multipliers = nu[n_user_rows:]
    dual_blocks: list[np.ndarray] = []
    for kind, idx in plan:
        if kind == "direct":
            dual_blocks.append(x_blocks[idx])
        else:
            if idx not in pair_cache:
                pair_cache[idx] = _pair_duals(pair_specs[idx], pair_multipliers)
            plus, minus = pair_cache[idx]
            dual_blocks.append(plus if kind == "pair+" else minus)

    gap_report = (-dobj) - (-pobj)
    solution = SDPSolution(
        moments=moments,
        primal_value=-pobj,
        dual_value=-dobj,
        dual_multipliers=-nu[:n_user_rows],  # dual rows of the maximize form
        dual_psd_blocks=tuple(dual_blocks),
        status=status,
        iterations=iterations,
        residuals={"primal_infeas": float(p_inf), "dual_infeas": float(d_inf),
                   "gap": float(gap_report)},
        slacks=y[n_m:].copy(),
        slack_duals=np.array([float(x_blocks[n_kept + k][0, 0]) for k in range(n_slack)]),
        infeasibility_ray=ray,
    )
    return solution


def residuals(sdp: SDPProblem, solution: SDPSolution) -> dict:
    """Recompute feasibility and gap measures from scratch (the solver loop
    is not trusted): worst linear-row violation plus worst block negative
    eigenvalue on the primal side, dual stationarity residual on the dual
    side, and gap = dual_value - primal_value."""
    from .moments import assemble

    m_scaled = solution.moments.values / sdp.scale_pow
    primal = 0.0
    for i, row in enumerate(sdp.constraints):
        value = float(row.coeffs @ m_scaled)
        if row.relation == "=":
            primal = max(primal, abs(value - row.rhs))
        elif row.relation == "<=":
            primal = max(primal, value - row.rhs)
        else:
            primal = max(primal, row.rhs - value)
    scaled_vector = MomentVector(sdp.n_z, sdp.tau, m_scaled)
    for _label, form in sdp.psd_blocks:
        mat = assemble(form, scaled_vector)
        primal = max(primal, -float(np.linalg.eigvalsh(mat)[0]))

    # Dual stationarity in the minimize form, against the raw block list.
    c, g_mat, _g_vec, psd_blocks, slack_blocks = _compile_blocks(sdp)
    nu = -np.asarray(solution.dual_multipliers)
    out = np.zeros(len(c))
    for b, x in zip(psd_blocks, solution.dual_psd_blocks):
        b.adjoint_into(np.asarray(x), out)
    for b, xs in zip(slack_blocks, solution.slack_duals):
        b.adjoint_into(np.array([[xs]]), out)
    dual = float(np.linalg.norm(c - g_mat.T @ nu - out, np.inf))

    return {
        "primal_infeas": float(primal),
        "dual_infeas": dual,
        "gap": float(solution.dual_value - solution.primal_value),
    }
