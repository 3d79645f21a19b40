from __future__ import annotations

import pytest

from cyccon.model import pair_bounds
from cyccon.sweep import grid_size, grid_systems, random_system, run_grid, run_sweep, three_way


def test_random_systems_are_realizable(rng):
    for _ in range(50):
        sys_ = random_system(rng, 4, denominator=5)
        for ctx in sys_.contexts:
            lo, hi = pair_bounds(ctx.e_ii, ctx.e_next)
            assert lo <= ctx.corr <= hi
            assert (ctx.corr * 5).denominator == 1


def test_three_way_on_pr_box(system):
    result = three_way(system([1, 1, 1, -1]))
    assert result.contextual
    assert not result.coupled
    assert not result.oracle_feasible
    assert result.agree


def test_three_way_boundary(system):
    result = three_way(system(["-0.6"] * 5))
    assert result.boundary
    assert result.coupled and result.oracle_feasible
    assert result.agree


def test_small_sweep_agrees():
    summary = run_sweep(rank=3, count=40, seed=2, denominator=4, progress=False)
    assert summary.checked == 40
    assert summary.disagreements == []


@pytest.mark.slow
@pytest.mark.parametrize("rank", [2, 3, 4, 5])
def test_sweep_acceptance(rank):
    summary = run_sweep(rank=rank, count=2500, seed=rank, progress=False)
    assert summary.disagreements == []


@pytest.mark.parametrize("denominator, per_context", [(1, 11), (2, 45)])
def test_grid_enumerates_realizable_contexts(denominator, per_context):
    assert grid_size(1, denominator) == per_context
    systems = list(grid_systems(2, denominator))
    assert len(systems) == per_context**2 == grid_size(2, denominator)
    assert len({s.model_dump_json() for s in systems}) == len(systems)


def test_half_grid_rank_two_agrees():
    summary = run_grid(rank=2, denominator=2, progress=False)
    assert summary.checked == 2025
    assert summary.disagreements == []
    assert 0 < summary.contextual < summary.checked


@pytest.mark.slow
def test_half_grid_rank_three_agrees():
    summary = run_grid(rank=3, denominator=2, progress=False)
    assert summary.checked == 45**3
    assert summary.disagreements == []
