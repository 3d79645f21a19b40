from __future__ import annotations

from fractions import Fraction as F

import pytest

from conftest import make_system
from cyccon.coupling import verify_coupling
from cyccon.criterion import check_consistent, check_main
from cyccon.errors import NotConsistentlyConnected, RankTooLarge
from cyccon.oracle import (
    _Pricing,
    build_problem,
    feasible,
    feasible_traditional,
    solve,
    verify_certificate,
    verify_solution,
)
from cyccon.sweep import random_system


def test_problem_shape():
    problem = build_problem(make_system([0, 0, 0]))
    assert len(problem.atoms) == 64
    assert len(problem.rows) == 1 + 3 * 3 + 3
    assert problem.row_labels[0] == "normalization"
    assert problem.row_labels[-1] == "connection 3: product"
    assert problem.variables == ("S1_c1", "S2_c1", "S2_c2", "S3_c2", "S3_c3", "S1_c3")


def test_connection_targets():
    sys_ = make_system([0, 0, 0], [("0.5", 0), (0, 0), (0, 0)])
    assert build_problem(sys_).rhs[-3:] == (F(1, 2), 1, 1)
    assert build_problem(sys_, traditional=True).rhs[-3:] == (1, 1, 1)


def test_perfect_triangle_is_feasible():
    sys_ = make_system([1, 1, 1])
    result = feasible(sys_)
    assert result.feasible
    assert verify_solution(build_problem(sys_), result.joint)
    assert verify_coupling(result.joint, sys_) == []


def test_pr_box_has_certificate():
    sys_ = make_system([1, 1, 1, -1])
    result = feasible(sys_)
    assert not result.feasible
    assert result.joint is None
    assert verify_certificate(build_problem(sys_), result.certificate)
    assert len(result.certificate) == len(result.row_labels)


def test_certificate_check_rejects_zero_vector():
    problem = build_problem(make_system([1, 1, 1, -1]))
    assert not verify_certificate(problem, [F(0)] * len(problem.rows))


def test_rank_cap():
    with pytest.raises(RankTooLarge):
        feasible(make_system([0] * 4), max_rank=3)


def test_rank_two_system():
    assert feasible(make_system([1, 1])).feasible
    assert not feasible(make_system([1, -1])).feasible


def test_agrees_with_main_criterion(rng):
    for _ in range(60):
        sys_ = random_system(rng, int(rng.integers(2, 4)), denominator=4)
        result = feasible(sys_)
        assert result.feasible == (not check_main(sys_).contextual)
        problem = build_problem(sys_)
        if result.feasible:
            assert verify_solution(problem, result.joint)
        else:
            assert verify_certificate(problem, result.certificate)


def test_boundary_systems_are_feasible():
    # s1 exactly at the bound in both forms
    assert feasible(make_system([F("-0.6")] * 5)).feasible
    assert feasible(make_system([1, 1, 1, 1])).feasible


@pytest.mark.parametrize("denominator", [3, 7])
def test_non_decimal_moments_give_checked_answers(rng, denominator):
    for _ in range(40):
        sys_ = random_system(rng, 3, denominator=denominator)
        result = feasible(sys_)
        assert result.feasible == (not check_main(sys_).contextual)
        problem = build_problem(sys_)
        if result.feasible:
            assert verify_solution(problem, result.joint)
        else:
            assert verify_certificate(problem, result.certificate)


def test_rank_five_agrees_with_main_criterion(rng):
    for _ in range(20):
        sys_ = random_system(rng, 5)
        result = feasible(sys_)
        assert result.feasible == (not check_main(sys_).contextual)
        problem = build_problem(sys_)
        if result.feasible:
            assert verify_solution(problem, result.joint)
        else:
            assert verify_certificate(problem, result.certificate)


@pytest.mark.slow
@pytest.mark.parametrize("rank", [4, 5])
def test_agrees_with_main_criterion_acceptance(rng, rank):
    for _ in range(10_000):
        sys_ = random_system(rng, rank)
        assert feasible(sys_).feasible == (not check_main(sys_).contextual)


def test_traditional_kcbs_boundary():
    sys_ = make_system([F("-0.6")] * 5)
    assert feasible_traditional(sys_).feasible
    assert not check_consistent(sys_).contextual


def test_traditional_pr_box():
    result = feasible_traditional(make_system([1, 1, 1, -1]))
    assert not result.feasible
    assert verify_certificate(build_problem(make_system([1, 1, 1, -1]), traditional=True), result.certificate)


def test_traditional_inconsistent_system():
    sys_ = make_system([0, 0, 0], [("0.5", 0), (0, 0), (0, 0)])
    with pytest.raises(NotConsistentlyConnected):
        feasible_traditional(sys_)
    forced = feasible_traditional(sys_, force=True)
    assert not forced.feasible
    assert forced.certificate is None
    assert forced.note


def test_solve_reports_pivots():
    result = solve(build_problem(make_system([0, 0, 0])))
    assert result.feasible
    assert result.pivots > 0


@pytest.mark.parametrize(
    "w, expected",
    [
        ([1, 0], 0),
        ([0, -1], 1),
        ([-1, 0], None),
        ([2**61, 0], 0),
        ([0, -(2**61)], 1),
        ([-(2**70), 0], None),
    ],
)
def test_pricing_picks_first_improving_column(w, expected):
    assert _Pricing([[1, 2], [3, -4]]).first_improving(w) == expected
