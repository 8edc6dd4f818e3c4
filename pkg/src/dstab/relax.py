"""Assembly of the order-tau moment relaxation as a concrete SDP.

The relaxation maximizes sum_alpha h_alpha m_alpha over truncated moment
vectors m subject to: the normalization m_0...0 = 1, one linear row per
lifted expectation constraint, positive semidefiniteness of the moment
matrix at order tau, and of one localizing matrix per support constraint at
order tau - ceil(deg q / 2).  Support equalities are expanded into
inequality pairs by default; a kernel encoding (entrywise linear equations
M(q m) = 0) is available behind a switch.

For conditioning, the moment variables are rescaled: each coordinate z_i is
divided by its magnitude s_i (box half-width for rho, ball radius for the
eigenvalue coordinates), which multiplies m_alpha by prod s_i^-alpha_i.
Constraint polynomials are additionally normalized to unit max coefficient.
The transformation is undone when solutions are reported, and it is exact:
the optimum value of the scaled SDP equals the unscaled one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .moments import LinearMatrixForm, MomentVector, localizing_matrix_form, moment_matrix_form
from .poly import MonomialBasis, Polynomial, monomial_basis
from .problem import LiftedProblem, minimal_order
from .sets import Relation


class RelaxationError(ValueError):
    pass


@dataclass(frozen=True)
class LinearConstraintRow:
    """One linear relation  coeffs . m  (relation)  rhs  over the moments."""

    coeffs: np.ndarray
    relation: str
    rhs: float
    label: str = ""


@dataclass(frozen=True)
class SDPProblem:
    """Concrete moment SDP: maximize objective . m subject to the linear
    rows and the PSD pencil blocks (all expressed in scaled moments)."""

    n_z: int
    tau: int
    basis: MonomialBasis
    objective: np.ndarray
    constraints: tuple[LinearConstraintRow, ...]
    psd_blocks: tuple[tuple[str, LinearMatrixForm], ...]
    normalization_index: int
    scale_pow: np.ndarray
    z_vars: tuple[str, ...]

    @property
    def num_moments(self) -> int:
        return len(self.basis)

    def block_dimensions(self) -> tuple[int, ...]:
        return tuple(form.dimension for _label, form in self.psd_blocks)


@dataclass(frozen=True)
class SDPStats:
    num_moments: int
    num_constraints: int
    block_dimensions: tuple[int, ...]
    largest_block: int
    tau: int
    n_z: int


class SolverStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    SLOW_PROGRESS = "SlowProgress"
    ITER_LIMIT = "IterLimit"


@dataclass(frozen=True)
class SDPSolution:
    """Solver output for a moment SDP.

    `moments` holds the unscaled moment vector (true moments of z).
    `primal_value` is the maximized objective and `dual_value` the matching
    upper bound from the dual; weak duality gives dual >= primal at the
    optimum up to solver accuracy.  `dual_multipliers` follow the order of
    `SDPProblem.constraints`; `dual_psd_blocks` follow `psd_blocks`.
    """

    moments: MomentVector
    primal_value: float
    dual_value: float
    dual_multipliers: np.ndarray
    dual_psd_blocks: tuple[np.ndarray, ...]
    status: SolverStatus
    iterations: int
    residuals: dict = field(default_factory=dict)
    slacks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    slack_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    infeasibility_ray: dict | None = None

    @property
    def optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL


def _scale_polynomial(p: Polynomial, scales) -> Polynomial:
    """p(S z~) for the diagonal substitution z = S z~."""
    out = {}
    for alpha, coeff in p.terms.items():
        factor = 1.0
        for s, e in zip(scales, alpha):
            if e:
                factor *= s ** e
        out[alpha] = coeff * factor
    return Polynomial(p.num_vars, out)


def _normalize(p: Polynomial) -> Polynomial:
    scale = p.max_abs_coeff()
    return p.scale(1.0 / scale) if scale > 0 else p


def assemble_relaxation(
    lifted: LiftedProblem,
    tau: int,
    equality_encoding: str = "pair",
    prune_eps: float = 0.0,
) -> SDPProblem:
    """Build the order-tau SDP for a lifted problem.

    `equality_encoding`: "pair" expands each support equality q = 0 into the
    localizer pair for q >= 0 and -q >= 0 (the default); "kernel" instead
    adds the entrywise linear equations M(q m) = 0.  `prune_eps` drops
    coefficients of magnitude <= prune_eps from the rescaled polynomials
    (default 0: exact arithmetic only).
    """
    if equality_encoding not in ("pair", "kernel"):
        raise RelaxationError(f"bad equality_encoding {equality_encoding!r}")
    tau_min = minimal_order(lifted)
    if tau < tau_min:
        raise RelaxationError(
            f"relaxation order {tau} is below the minimal order {tau_min}"
        )

    n_z = lifted.num_vars
    scales = lifted.var_scales
    basis = monomial_basis(n_z, 2 * tau)
    num_moments = len(basis)

    scale_pow = np.empty(num_moments)
    for idx, alpha in enumerate(basis.elements):
        factor = 1.0
        for s, e in zip(scales, alpha):
            if e:
                factor *= s ** e
        scale_pow[idx] = factor

    def row_vector(p: Polynomial) -> np.ndarray:
        row = np.zeros(num_moments)
        for alpha, coeff in p.terms.items():
            row[basis.index(alpha)] += coeff
        return row

    def rescale(p: Polynomial) -> Polynomial:
        return _scale_polynomial(p, scales).prune(prune_eps)

    objective = row_vector(rescale(lifted.objective))

    constraints: list[LinearConstraintRow] = []
    for k, (f, rel, target) in enumerate(lifted.moment_constraints):
        f_scaled = rescale(f)
        norm = max(f_scaled.max_abs_coeff(), abs(target))
        if norm == 0:
            continue
        constraints.append(
            LinearConstraintRow(
                coeffs=row_vector(f_scaled.scale(1.0 / norm)),
                relation=rel,
                rhs=target / norm,
                label=f"moment[{k}]",
            )
        )
    # the total-mass normalization must always be present
    def _is_normalization(row: LinearConstraintRow) -> bool:
        return (
            row.relation == "=" and row.rhs == 1.0
            and row.coeffs[0] == 1.0 and np.count_nonzero(row.coeffs) == 1
        )
    if not any(_is_normalization(row) for row in constraints):
        mass = np.zeros(num_moments)
        mass[0] = 1.0
        constraints.insert(0, LinearConstraintRow(mass, "=", 1.0, "normalization"))

    blocks: list[tuple[str, LinearMatrixForm]] = [
        ("moment", moment_matrix_form(n_z, tau))
    ]

    def add_localizer(q: Polynomial, label: str) -> None:
        order = tau - math.ceil(q.degree / 2)
        blocks.append((label, localizing_matrix_form(q, n_z, order)))

    kernel_rows: list[LinearConstraintRow] = []
    for j, (q, rel) in enumerate(lifted.support.constraints):
        q_scaled = _normalize(rescale(q))
        if q_scaled.is_zero():
            continue
        if rel is Relation.GE:
            add_localizer(q_scaled, f"q[{j}]")
        elif equality_encoding == "pair":
            add_localizer(q_scaled, f"q[{j}]+")
            add_localizer(-q_scaled, f"q[{j}]-")
        else:
            order = tau - math.ceil(q_scaled.degree / 2)
            sub_basis = monomial_basis(n_z, order)
            for i, bi in enumerate(sub_basis.elements):
                for jj in range(i, len(sub_basis)):
                    bj = sub_basis.elements[jj]
                    row = np.zeros(num_moments)
                    for gamma, coeff in q_scaled.terms.items():
                        alpha = tuple(a + b + g for a, b, g in zip(bi, bj, gamma))
                        row[basis.index(alpha)] += coeff
                    kernel_rows.append(
                        LinearConstraintRow(
                            coeffs=row, relation="=", rhs=0.0,
                            label=f"kernel[{j}]({i},{jj})",
                        )
                    )
    constraints.extend(kernel_rows)

    return SDPProblem(
        n_z=n_z,
        tau=tau,
        basis=basis,
        objective=objective,
        constraints=tuple(constraints),
        psd_blocks=tuple(blocks),
        normalization_index=0,
        scale_pow=scale_pow,
        z_vars=lifted.z_vars,
    )


def problem_stats(sdp: SDPProblem) -> SDPStats:
    dims = sdp.block_dimensions()
    return SDPStats(
        num_moments=sdp.num_moments,
        num_constraints=len(sdp.constraints),
        block_dimensions=dims,
        largest_block=max(dims),
        tau=sdp.tau,
        n_z=sdp.n_z,
    )


def export_sdp(sdp: SDPProblem, path) -> None:
    """Write the assembled SDP in a plain sparse text format.

    Layout: a header with the dimensions, the graded-lex basis (one
    exponent vector per line), the objective as (moment-index, coefficient)
    pairs, each linear row, then each PSD block as (row, col, moment-index,
    coefficient) quadruples.  Indices are zero-based.
    """
    lines = ["DSTAB-SDP 1"]
    lines.append(f"nz {sdp.n_z} tau {sdp.tau} moments {sdp.num_moments}")
    lines.append("zvars " + " ".join(sdp.z_vars))
    lines.append("basis")
    for idx, alpha in enumerate(sdp.basis.elements):
        lines.append(f"{idx} " + " ".join(str(e) for e in alpha))
    nnz = np.nonzero(sdp.objective)[0]
    lines.append(f"objective {len(nnz)}")
    for idx in nnz:
        lines.append(f"{idx} {float(sdp.objective[idx])!r}")
    for k, row in enumerate(sdp.constraints):
        nnz = np.nonzero(row.coeffs)[0]
        lines.append(f"constraint {k} {row.relation} {float(row.rhs)!r} {len(nnz)} {row.label}")
        for idx in nnz:
            lines.append(f"{idx} {float(row.coeffs[idx])!r}")
    for k, (label, form) in enumerate(sdp.psd_blocks):
        count = sum(len(vals) for _a, _r, _c, vals in form.terms)
        lines.append(f"block {k} {form.dimension} {count} {label}")
        for alpha, rows, cols, vals in form.terms:
            idx = sdp.basis.index(alpha)
            for r, c, v in zip(rows, cols, vals):
                lines.append(f"{r} {c} {idx} {float(v)!r}")
    lines.append("end")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
