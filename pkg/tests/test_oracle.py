import numpy as np
import pytest

from conftest import hurwitz_problem, running_problem

from dstab.oracle import (
    AtomicLPInfeasible,
    OracleError,
    atomic_lp_bound,
    eigenvalues,
    grid_points,
    grid_violation_search,
    simplex_maximize,
    unit_eigenvector,
)
from dstab.poly import parse_polynomial
from dstab.problem import DStabilityProblem, UncertainMatrix
from dstab.sets import Relation, box_set, region_preset


def _sorted(values):
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


class TestEigenvalues:
    def test_running_example_at_one(self):
        problem = running_problem()
        eigs = eigenvalues(problem.matrix.evaluate([1.0]))
        assert np.allclose(_sorted(eigs), [-1.0, 0.0])

    def test_identity(self):
        assert np.allclose(eigenvalues(np.eye(3)), [1.0, 1.0, 1.0])

    def test_companion_of_characteristic_polynomial(self):
        # s^2 + 5.3 s + 0.96 at rho = 0: both roots real and negative
        companion = np.array([[0.0, -0.96], [1.0, -5.3]])
        eigs = eigenvalues(companion)
        expected = np.roots([1.0, 5.3, 0.96])
        assert np.allclose(_sorted(eigs), _sorted(expected), atol=1e-10)
        assert np.all(eigs.real < 0) and np.all(eigs.imag == 0)

    def test_complex_pairs(self):
        m = np.array([[0.0, 2.0], [-2.0, 0.0]])
        eigs = _sorted(eigenvalues(m))
        assert np.allclose(eigs, [-2j, 2j])

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 12, 16])
    def test_matches_numpy_on_random_matrices(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(15):
            m = rng.standard_normal((n, n)) * rng.uniform(0.5, 20.0)
            mine = _sorted(eigenvalues(m))
            ref = _sorted(np.linalg.eigvals(m))
            assert np.allclose(mine, ref, atol=1e-8 * max(1.0, np.abs(m).max()))

    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    def test_backward_stability(self, n):
        rng = np.random.default_rng(7 * n)
        for _ in range(10):
            m = rng.standard_normal((n, n))
            scale = max(1.0, np.linalg.norm(m))
            for lam in eigenvalues(m):
                _v, residual = unit_eigenvector(m, lam)
                assert residual <= 1e-8 * scale

    def test_defective_matrix(self):
        jordan = np.array([[2.0, 1.0], [0.0, 2.0]])
        assert np.allclose(eigenvalues(jordan), [2.0, 2.0])

    def test_validation(self):
        with pytest.raises(OracleError):
            eigenvalues(np.zeros((2, 3)))
        with pytest.raises(OracleError):
            eigenvalues(np.eye(65))


class TestGridSearch:
    def test_running_witness(self, support_problem):
        witness = grid_violation_search(support_problem, 101)
        assert witness is not None
        assert witness.rho[0] == pytest.approx(1.0)
        assert abs(witness.lam) <= 1e-9
        assert witness.eig_residual <= 1e-8
        assert support_problem.region.contains(witness.lam, 1e-6)

    def test_hurwitz_clean(self):
        assert grid_violation_search(hurwitz_problem(), 1001) is None

    def test_shrunk_support_clean(self):
        problem = running_problem(mean=None, upper=0.9)
        assert grid_violation_search(problem, 300) is None

    def test_deepest_witness_wins(self):
        # eigenvalues rho and rho - 3: on [0, 2] the deepest violation of
        # lre >= 0 is at rho = 2
        names = ["rho"]
        from dstab.poly import Polynomial
        matrix = UncertainMatrix(
            ("rho",),
            ((parse_polynomial("rho", names), Polynomial.zero(1)),
             (Polynomial.zero(1), parse_polynomial("rho - 3", names))),
        )
        problem = DStabilityProblem(
            matrix=matrix, delta=box_set(("rho",), [0.0], [2.0]),
            region=region_preset("left_half_plane_closure"),
        )
        witness = grid_violation_search(problem, 21)
        assert witness.rho[0] == pytest.approx(2.0)
        assert witness.lam == pytest.approx(2.0)

    def test_extra_points_on_measure_zero_support(self):
        # equality-constrained delta that no grid point satisfies: the grid
        # is empty and explicit candidate points are the only way in
        names = ["a", "b"]
        constraint = parse_polynomial("a - b - 0.05", names)
        delta = box_set(("a", "b"), [0.0, 0.0], [1.0, 1.0]).with_constraints(
            [(constraint, Relation.EQ)]
        )
        matrix = UncertainMatrix(
            ("a", "b"),
            ((parse_polynomial("a - 1", names), parse_polynomial("0", names)),
             (parse_polynomial("0", names), parse_polynomial("b - 1", names))),
        )
        problem = DStabilityProblem(
            matrix=matrix, delta=delta,
            region=region_preset("left_half_plane_closure"),
        )
        with pytest.raises(OracleError):
            grid_violation_search(problem, 11)
        witness = grid_violation_search(problem, 11, extra_points=[[1.0, 0.95]])
        assert witness is not None and witness.rho[0] == 1.0


class TestSimplex:
    def test_basic(self):
        x, value = simplex_maximize(
            [3.0, 2.0], a_eq=np.zeros((0, 2)), b_eq=[],
            a_le=[[1.0, 1.0], [1.0, 0.0]], b_le=[4.0, 2.0],
        )
        assert value == pytest.approx(10.0)
        assert np.allclose(x, [2.0, 2.0])

    def test_equality_and_bounds(self):
        x, value = simplex_maximize(
            [1.0, 0.0, 0.0], a_eq=[[1.0, 1.0, 1.0]], b_eq=[1.0],
            a_le=[[1.0, 0.0, 0.0]], b_le=[0.25],
        )
        assert value == pytest.approx(0.25)

    def test_infeasible(self):
        with pytest.raises(AtomicLPInfeasible):
            simplex_maximize([1.0], a_eq=[[1.0], [1.0]], b_eq=[0.0, 1.0])

    def test_degenerate_ties_deterministic(self):
        args = ([1.0, 1.0], [[1.0, 1.0]], [1.0], [[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        first = simplex_maximize(*args)
        second = simplex_maximize(*args)
        assert np.array_equal(first[0], second[0]) and first[1] == second[1]


class TestAtomicLP:
    def test_three_atom_mean(self, mean_problem):
        result = atomic_lp_bound(mean_problem, [[0.0], [0.5], [1.0]])
        assert result.lower_bound == pytest.approx(0.5, abs=1e-9)
        assert np.allclose(result.weights, [0.5, 0.0, 0.5], atol=1e-9)
        assert list(result.violating) == [False, False, True]

    def test_support_only(self, support_problem):
        result = atomic_lp_bound(support_problem, [[0.0], [1.0]])
        assert result.lower_bound == pytest.approx(1.0)
        assert np.allclose(result.weights, [0.0, 1.0])

    def test_single_stable_atom(self, mean_problem):
        result = atomic_lp_bound(mean_problem, [[0.5]])
        assert result.lower_bound == pytest.approx(0.0)

    def test_infeasible_grid(self):
        problem = running_problem(mean=0.9)
        with pytest.raises(AtomicLPInfeasible):
            atomic_lp_bound(problem, [[0.0], [0.5]])

    def test_atom_outside_support_rejected(self, mean_problem):
        with pytest.raises(OracleError):
            atomic_lp_bound(mean_problem, [[0.0], [1.5]])

    def test_refinement_monotonicity(self, mean_problem):
        coarse = atomic_lp_bound(mean_problem, [[0.0], [0.5], [1.0]])
        atoms = [[v] for v in np.linspace(0.0, 1.0, 11)]
        fine = atomic_lp_bound(mean_problem, atoms)
        assert fine.lower_bound >= coarse.lower_bound - 1e-12
        finer = atomic_lp_bound(mean_problem, [[v] for v in np.linspace(0.0, 1.0, 41)])
        assert finer.lower_bound >= fine.lower_bound - 1e-12

    def test_weights_form_probability(self, mean_problem):
        result = atomic_lp_bound(mean_problem, [[v] for v in np.linspace(0, 1, 21)])
        assert result.weights.min() >= -1e-12
        assert result.weights.sum() == pytest.approx(1.0, abs=1e-10)

    def test_variance_bound_constraint(self):
        problem = running_problem(mean=0.5, variance=0.05)
        atoms = [[v] for v in np.linspace(0.0, 1.0, 21)]
        result = atomic_lp_bound(problem, atoms)
        # extremal measure w*delta_1 + (1-w)*delta_a with w = sigma^2/(0.25+sigma^2)
        assert result.lower_bound == pytest.approx(1.0 / 6.0, abs=1e-6)


class TestGridPoints:
    def test_box_grid(self, mean_problem):
        pts = grid_points(mean_problem, 11)
        assert pts.shape == (11, 1)
        assert pts[0, 0] == 0.0 and pts[-1, 0] == 1.0

    def test_multidimensional_cap_falls_back_to_sampling(self):
        names = ["a", "b", "c"]
        from dstab.poly import Polynomial
        matrix = UncertainMatrix(
            tuple(names),
            tuple(
                tuple(
                    parse_polynomial("a", names) if i == j else Polynomial.zero(3)
                    for j in range(2)
                )
                for i in range(2)
            ),
        )
        problem = DStabilityProblem(
            matrix=matrix,
            delta=box_set(tuple(names), [0.0] * 3, [1.0] * 3),
            region=region_preset("left_half_plane_closure"),
        )
        pts = grid_points(problem, 1000, max_points=500, seed=1)
        assert pts.shape == (500, 3)
        again = grid_points(problem, 1000, max_points=500, seed=1)
        assert np.array_equal(pts, again)


class TestBifurcationJacobian:
    SINGULAR_POINT = (8.5412, 2.4650, 2.4650)

    def _problem(self, k: float) -> DStabilityProblem:
        from dstab.cli import load_problem
        from conftest import PROBLEMS_DIR
        problem, _ = load_problem(PROBLEMS_DIR / "bifurcation.prob", {"k": k})
        return problem

    def _full_point(self):
        r1, r2, r3 = self.SINGULAR_POINT
        return [r1, r2, r3, r3 / r1, 1.0 / (r1 - r3)]

    def test_determinant_nearly_zero_at_singular_point(self):
        problem = self._problem(0.4650)
        jac = problem.matrix.evaluate(self._full_point())
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        assert abs(det) <= 1e-3

    def test_witness_at_singular_point(self):
        problem = self._problem(0.4650)
        witness = grid_violation_search(
            problem, 5, membership_tol=1e-4, extra_points=[self._full_point()]
        )
        assert witness is not None
        assert np.allclose(witness.rho[:3], self.SINGULAR_POINT)
        assert abs(witness.lam.real) <= 1e-4


class TestEigenvaluesStress:
    def test_large_dense(self):
        rng = np.random.default_rng(64)
        for n in (32, 64):
            m = rng.standard_normal((n, n))
            mine = _sorted(eigenvalues(m))
            ref = _sorted(np.linalg.eigvals(m))
            assert np.allclose(mine, ref, atol=1e-7 * max(1.0, np.abs(m).max()))

    def test_repeated_complex_pairs(self):
        # block-diagonal rotations with equal angles: eigenvalue multiplicity 2
        block = np.array([[0.3, 1.7], [-1.7, 0.3]])
        m = np.zeros((6, 6))
        for k in range(3):
            m[2 * k: 2 * k + 2, 2 * k: 2 * k + 2] = block
        mine = _sorted(eigenvalues(m))
        ref = _sorted(np.linalg.eigvals(m))
        assert np.allclose(mine, ref, atol=1e-10)

    def test_nilpotent(self):
        m = np.diag(np.ones(5), k=1)  # all eigenvalues zero, maximally defective
        assert np.allclose(eigenvalues(m), np.zeros(6), atol=1e-6)
