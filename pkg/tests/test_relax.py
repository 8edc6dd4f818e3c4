import dataclasses
import math

import numpy as np
import pytest

from conftest import hurwitz_problem, running_problem

from dstab.moments import MomentVector, assemble, moments_of_atomic
from dstab.problem import LiftedProblem, build_lifted
from dstab.relax import (
    RelaxationError,
    assemble_relaxation,
    export_sdp,
    problem_stats,
)
from dstab.sdp import SolverSettings, solve


@pytest.fixture(scope="module")
def mean_sdp():
    return assemble_relaxation(build_lifted(running_problem(mean=0.5)), 2)


class TestRunningAssembly:
    def test_objective_selects_x_norm(self, mean_sdp):
        basis = mean_sdp.basis
        nonzero = {basis.elements[i]: c for i, c in enumerate(mean_sdp.objective) if c}
        assert nonzero == {(0, 0, 2, 0): 1.0, (0, 0, 0, 2): 1.0}

    def test_equality_rows(self, mean_sdp):
        basis = mean_sdp.basis
        norm_row, mean_row = mean_sdp.constraints
        assert norm_row.relation == "=" and norm_row.rhs == 1.0
        assert norm_row.coeffs[basis.index((0, 0, 0, 0))] == 1.0
        assert np.count_nonzero(norm_row.coeffs) == 1
        assert mean_row.relation == "=" and mean_row.rhs == 0.5
        assert mean_row.coeffs[basis.index((1, 0, 0, 0))] == 1.0
        assert np.count_nonzero(mean_row.coeffs) == 1

    def test_block_layout(self, mean_sdp):
        # moment block at full order tau, localizers at tau - ceil(deg/2);
        # equality constraints appear as +/- adjacent pairs
        labels = [label for label, _f in mean_sdp.psd_blocks]
        dims = mean_sdp.block_dimensions()
        assert labels[0] == "moment" and dims[0] == 15
        assert dims[1:] == (5,) * 9
        assert labels[4:8] == ["q[3]+", "q[3]-", "q[4]+", "q[4]-"]

    def test_stats(self, mean_sdp):
        stats = problem_stats(mean_sdp)
        assert stats.num_moments == 70
        assert stats.largest_block == 15
        assert stats.num_constraints == 2

    def test_support_only_drops_mean_row(self):
        sdp = assemble_relaxation(build_lifted(running_problem(mean=None)), 2)
        assert len(sdp.constraints) == 1
        assert sdp.constraints[0].relation == "="

    def test_order_below_minimum_rejected(self):
        lifted = build_lifted(hurwitz_problem())
        with pytest.raises(RelaxationError, match="minimal order"):
            assemble_relaxation(lifted, 1)

    def test_bad_encoding_rejected(self, mean_sdp):
        with pytest.raises(RelaxationError):
            assemble_relaxation(build_lifted(running_problem()), 2, equality_encoding="x")


class TestStats:
    def test_hurwitz_tau3(self):
        sdp = assemble_relaxation(build_lifted(hurwitz_problem()), 3)
        stats = problem_stats(sdp)
        assert stats.num_moments == math.comb(7 + 6, 6) == 1716
        assert stats.largest_block == math.comb(7 + 3, 3) == 120

    def test_tiny_problem(self):
        # one lifted variable at order 1: 3 moments, 2x2 moment block
        from dstab.poly import Polynomial, parse_polynomial
        from dstab.sets import Relation, SemialgebraicSet
        t = parse_polynomial("t", ["t"])
        lifted = LiftedProblem(
            z_vars=("t",),
            support=SemialgebraicSet(("t",), ((t, Relation.GE),)),
            objective=t,
            moment_constraints=((Polynomial.constant(1, 1.0), "=", 1.0),),
            var_scales=(1.0,),
            rho_indices=(0,),
            lambda_indices=(),
            x_indices=(),
            real_mode=True,
            matrix_size=0,
        )
        stats = problem_stats(assemble_relaxation(lifted, 1))
        assert stats.num_moments == 3
        assert stats.largest_block == 2


class TestScaling:
    def test_scale_pow_matches_variable_scales(self):
        lifted = build_lifted(hurwitz_problem())
        sdp = assemble_relaxation(lifted, 2)
        basis = sdp.basis
        s_rho, s_lam = lifted.var_scales[0], lifted.var_scales[1]
        assert sdp.scale_pow[basis.index((0,) * 7)] == 1.0
        assert sdp.scale_pow[basis.index((1, 0, 0, 0, 0, 0, 0))] == pytest.approx(s_rho)
        assert sdp.scale_pow[basis.index((2, 1, 0, 0, 0, 0, 0))] == pytest.approx(
            s_rho ** 2 * s_lam
        )

    def test_constraints_normalized(self):
        sdp = assemble_relaxation(build_lifted(hurwitz_problem()), 2)
        for row in sdp.constraints:
            assert max(np.abs(row.coeffs).max(), abs(row.rhs)) <= 1.0 + 1e-12
        for _label, form in sdp.psd_blocks[1:]:
            biggest = max(np.abs(v).max() for _a, _r, _c, v in form.terms)
            assert biggest <= 1.0 + 1e-12


class TestFeasibilityTransfer:
    def test_atomic_measures_are_feasible(self, mean_sdp):
        # the optimizing measure of the mean-constrained running example
        atoms = [[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0]]
        m = moments_of_atomic(atoms, [0.5, 0.5], 4, 2)
        for row in mean_sdp.constraints:
            value = row.coeffs @ m.values  # scales are all 1 here
            assert value == pytest.approx(row.rhs, abs=1e-10)
        for _label, form in mean_sdp.psd_blocks:
            assert np.linalg.eigvalsh(assemble(form, m))[0] >= -1e-8
        objective = float(mean_sdp.objective @ m.values)
        solution = solve(mean_sdp, SolverSettings())
        assert objective <= solution.primal_value + 1e-6

    def test_truncation_stays_feasible(self):
        lifted = build_lifted(running_problem(mean=0.5))
        sdp2 = assemble_relaxation(lifted, 2)
        sdp3 = assemble_relaxation(lifted, 3)
        atoms = [[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0]]
        m3 = moments_of_atomic(atoms, [0.5, 0.5], 4, 3)
        # truncate the tau=3 moment vector onto the tau=2 basis
        basis3 = sdp3.basis
        trunc = np.array([m3.values[basis3.index(a)] for a in sdp2.basis.elements])
        m2 = MomentVector(4, 2, trunc)
        for _label, form in sdp2.psd_blocks:
            assert np.linalg.eigvalsh(assemble(form, m2))[0] >= -1e-8
        for row in sdp2.constraints:
            assert row.coeffs @ m2.values == pytest.approx(row.rhs, abs=1e-10)


class TestKernelEncoding:
    def test_same_optimum_as_pair_encoding(self):
        lifted = build_lifted(running_problem(mean=0.5))
        pair = solve(assemble_relaxation(lifted, 2, equality_encoding="pair"))
        kernel_sdp = assemble_relaxation(lifted, 2, equality_encoding="kernel")
        kernel = solve(kernel_sdp)
        assert kernel.status.value == "Optimal"
        assert kernel.primal_value == pytest.approx(pair.primal_value, abs=1e-6)
        # kernel mode trades the pair blocks for linear rows
        assert len(kernel_sdp.psd_blocks) < 10
        assert len(kernel_sdp.constraints) > 2


class TestExport:
    def test_round_trip_structure(self, mean_sdp, tmp_path):
        path = tmp_path / "out.sdp"
        export_sdp(mean_sdp, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "DSTAB-SDP 1"
        assert lines[1] == "nz 4 tau 2 moments 70"
        assert lines[2] == "zvars rho lre x1 x2"
        assert lines[3] == "basis"
        basis_lines = lines[4:4 + 70]
        assert basis_lines[0] == "0 0 0 0 0"
        parsed = [tuple(int(v) for v in ln.split()[1:]) for ln in basis_lines]
        assert parsed == list(mean_sdp.basis.elements)
        obj_at = lines.index(f"objective 2")
        entries = {int(ln.split()[0]): float(ln.split()[1])
                   for ln in lines[obj_at + 1: obj_at + 3]}
        for idx, coeff in entries.items():
            assert mean_sdp.objective[idx] == coeff
        assert lines[-1] == "end"
        assert sum(1 for ln in lines if ln.startswith("block ")) == 10


class TestPruneEps:
    def test_tiny_coefficients_dropped(self):
        import dataclasses
        from dstab.poly import Polynomial
        lifted = build_lifted(running_problem(mean=0.5))
        noisy = lifted.objective + Polynomial.monomial(4, (4, 0, 0, 0), 1e-14)
        lifted = dataclasses.replace(lifted, objective=noisy)
        exact = assemble_relaxation(lifted, 2)
        pruned = assemble_relaxation(lifted, 2, prune_eps=1e-12)
        idx = exact.basis.index((4, 0, 0, 0))
        assert exact.objective[idx] == 1e-14
        assert pruned.objective[idx] == 0.0
