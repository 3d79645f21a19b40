"""
Randomized and exhaustive cross-checks: the closed-form criterion, the explicit coupling
construction, and the brute-force oracle must give the same answer.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
from tqdm import tqdm

from cyccon.coupling import maximal_coupling, verify_coupling
from cyccon.criterion import check_main
from cyccon.errors import InfeasibleCycle
from cyccon.model import ContextMoments, CyclicSystem, pair_bounds
from cyccon.oracle import feasible

logger = logging.getLogger(__name__)


def random_system(rng: np.random.Generator, rank: int, denominator: int = 8) -> CyclicSystem:
    """
    Random realizable system with every moment a multiple of 1/denominator.
    Correlations are drawn from the grid inside their realizable interval, so
    boundary values come up often.
    """
    den = denominator
    contexts = []
    for _ in range(rank):
        a = Fraction(int(rng.integers(-den, den + 1)), den)
        b = Fraction(int(rng.integers(-den, den + 1)), den)
        lo, hi = pair_bounds(a, b)
        k = int(rng.integers(int(lo * den), int(hi * den) + 1))
        contexts.append(ContextMoments(e_ii=a, e_next=b, corr=Fraction(k, den)))
    return CyclicSystem(labels=tuple(f"q{i}" for i in range(1, rank + 1)), contexts=tuple(contexts))


def _grid_contexts(denominator: int) -> list[ContextMoments]:
    den = denominator
    out = []
    for a_num in range(-den, den + 1):
        for b_num in range(-den, den + 1):
            a, b = Fraction(a_num, den), Fraction(b_num, den)
            lo, hi = pair_bounds(a, b)
            for k in range(int(lo * den), int(hi * den) + 1):
                out.append(ContextMoments(e_ii=a, e_next=b, corr=Fraction(k, den)))
    return out


def grid_systems(rank: int, denominator: int = 2) -> Iterator[CyclicSystem]:
    """Every realizable system of the given rank with moments on the 1/denominator grid."""
    labels = tuple(f"q{i}" for i in range(1, rank + 1))
    for contexts in itertools.product(_grid_contexts(denominator), repeat=rank):
        yield CyclicSystem(labels=labels, contexts=contexts)


def grid_size(rank: int, denominator: int = 2) -> int:
    return len(_grid_contexts(denominator)) ** rank


@dataclass(frozen=True)
class Agreement:
    contextual: bool
    coupled: bool
    oracle_feasible: bool
    boundary: bool = False
    coupling_problems: tuple[str, ...] = ()

    @property
    def agree(self) -> bool:
        return (
            (not self.contextual) == self.coupled == self.oracle_feasible
            and not self.coupling_problems
        )


def three_way(system: CyclicSystem, *, max_rank: int = 6, max_variables: int = 16) -> Agreement:
    verdict = check_main(system)
    problems: tuple[str, ...] = ()
    try:
        joint = maximal_coupling(system, max_variables=max_variables)
        coupled = True
        problems = tuple(verify_coupling(joint, system))
    except InfeasibleCycle:
        coupled = False
    oracle = feasible(system, max_rank=max_rank)
    return Agreement(
        contextual=verdict.contextual,
        coupled=coupled,
        oracle_feasible=oracle.feasible,
        boundary=verdict.lhs == verdict.bound,
        coupling_problems=problems,
    )


@dataclass
class SweepSummary:
    checked: int = 0
    contextual: int = 0
    boundary: int = 0
    disagreements: list[CyclicSystem] = field(default_factory=list)


def _tally(systems: Iterable[CyclicSystem], *, max_rank: int, max_variables: int) -> SweepSummary:
    summary = SweepSummary()
    for system in systems:
        result = three_way(system, max_rank=max_rank, max_variables=max_variables)
        summary.checked += 1
        summary.contextual += int(result.contextual)
        summary.boundary += int(result.boundary)
        if not result.agree:
            logger.error("disagreement on %s: %s", system.model_dump_json(), result)
            summary.disagreements.append(system)
    return summary


def run_sweep(
    *,
    rank: int,
    count: int,
    seed: int | None = None,
    denominator: int = 8,
    max_rank: int = 6,
    max_variables: int = 16,
    progress: bool = True,
) -> SweepSummary:
    rng = np.random.default_rng(seed)
    systems = (
        random_system(rng, rank, denominator)
        for _ in tqdm(range(count), desc=f"rank {rank}", disable=not progress)
    )
    return _tally(systems, max_rank=max_rank, max_variables=max_variables)


def run_grid(
    *,
    rank: int,
    denominator: int = 2,
    max_rank: int = 6,
    max_variables: int = 16,
    progress: bool = True,
) -> SweepSummary:
    """Three-way agreement on every system of :func:`grid_systems`."""
    systems = tqdm(
        grid_systems(rank, denominator),
        total=grid_size(rank, denominator),
        desc=f"rank {rank} grid",
        disable=not progress,
    )
    return _tally(systems, max_rank=max_rank, max_variables=max_variables)
