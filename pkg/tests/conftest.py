"""Shared fixtures: the running 2x2 example in its variants, the Hurwitz
matrix, and paths to the shipped problem files."""

import pathlib

import pytest

from dstab.poly import Polynomial, parse_polynomial
from dstab.problem import DStabilityProblem, MomentConstraint, UncertainMatrix
from dstab.sets import box_set, region_preset

PROBLEMS_DIR = pathlib.Path(__file__).resolve().parent.parent / "problems"


def running_matrix() -> UncertainMatrix:
    rho = parse_polynomial("rho - 1", ["rho"])
    zero = Polynomial.zero(1)
    return UncertainMatrix(("rho",), ((rho, zero), (zero, Polynomial.constant(1, -1.0))))


def running_problem(mean: float | None = 0.5, upper: float = 1.0,
                    variance: float | None = None) -> DStabilityProblem:
    constraints = []
    if mean is not None:
        constraints.append(MomentConstraint(parse_polynomial("rho", ["rho"]), "=", mean))
    if variance is not None:
        constraints.append(
            MomentConstraint(parse_polynomial("(rho - 0.5)^2", ["rho"]), "<=", variance)
        )
    return DStabilityProblem(
        matrix=running_matrix(),
        delta=box_set(("rho",), [0.0], [upper]),
        region=region_preset("left_half_plane_closure"),
        moment_constraints=tuple(constraints),
    )


def hurwitz_problem() -> DStabilityProblem:
    names = ["rho1"]
    rows = [
        ["-2.4 - rho1^2", "6 - rho1^2"],
        ["1 - 2*rho1^2", "-2.9 - 2*rho1"],
    ]
    matrix = UncertainMatrix(
        ("rho1",),
        tuple(tuple(parse_polynomial(e, names) for e in row) for row in rows),
    )
    return DStabilityProblem(
        matrix=matrix,
        delta=box_set(("rho1",), [-0.1], [3.4]),
        region=region_preset("left_half_plane_closure"),
    )


@pytest.fixture(scope="session")
def problems_dir() -> pathlib.Path:
    return PROBLEMS_DIR


@pytest.fixture()
def mean_problem() -> DStabilityProblem:
    return running_problem(mean=0.5)


@pytest.fixture()
def support_problem() -> DStabilityProblem:
    return running_problem(mean=None)
