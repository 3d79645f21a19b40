"""
(Non)contextuality decisions for cyclic systems.

Every check returns a :class:`Verdict`. Boundary values (lhs == bound) are
noncontextual: the inequalities are non-strict.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field

from cyccon.errors import (
    CrossCheckError,
    DomainError,
    NotConsistentlyConnected,
    OverlapViolation,
    ZeroOverlapViolation,
)
from cyccon.exact import Rational, to_fraction
from cyccon.model import ContextMoments, CyclicSystem
from cyccon.sfunc import (
    DEFAULT_GRID_SPACING,
    DEFAULT_MAX_GRID_POINTS,
    Box,
    BoxMode,
    Number,
    s1_box_range,
    s1_witness,
)

if TYPE_CHECKING:
    from cyccon.stats.intervals import MomentBox

logger = logging.getLogger(__name__)

CriterionKind = Literal["main", "consistent", "necessary", "kcbs"]


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: CriterionKind
    lhs: Rational
    bound: Rational
    contextual: bool
    inconclusive: bool = Field(
        default=False,
        description="Set when a necessary-only test holds; says nothing either way.",
    )
    witness: list[int] | None = Field(default=None, description="Maximizing odd-parity sign vector.")
    deltas: list[Rational] = Field(default_factory=list)


class IntervalVerdict(BaseModel):
    """Range of s1(corr) - sum|Δ| over a moment box, and whether it certifies contextuality."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["interval"] = "interval"
    lo: Rational
    hi: Rational
    bound: Rational
    certified: bool
    mode: BoxMode
    s1_lo: Rational
    s1_hi: Rational
    delta_abs_max: Rational = Field(description="sum of max |Δ_i| over the box")
    delta_abs_min: Rational = Field(description="sum of min |Δ_i| over the box")


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

Criterion = Callable[[CyclicSystem], Verdict]

CRITERION_REGISTRY: dict[str, Criterion] = {}


def register_criterion(kind: str):
    """Function decorator that registers a system-level criterion under ``kind``."""

    def _decorator(fn: Criterion) -> Criterion:
        CRITERION_REGISTRY[kind] = fn
        return fn

    return _decorator


def get_criterion(kind: str) -> Criterion:
    return CRITERION_REGISTRY[kind]


def list_criteria() -> list[str]:
    return sorted(CRITERION_REGISTRY)


# ---------------------------------------------------------------------------
# System criteria
# ---------------------------------------------------------------------------


def _main_arguments(system: CyclicSystem) -> list[Fraction]:
    args: list[Fraction] = []
    for corr, d in zip(system.corrs(), system.deltas()):
        args += [corr, 1 - abs(d)]
    return args


@register_criterion("main")
def check_main(system: CyclicSystem) -> Verdict:
    """s1(corr_1, 1-|Δ_1|, ..., corr_n, 1-|Δ_n|) <= 2n - 2 iff a maximal coupling exists."""
    lhs, witness = s1_witness(_main_arguments(system))
    bound = Fraction(2 * system.rank - 2)
    return Verdict(
        kind="main",
        lhs=lhs,
        bound=bound,
        contextual=lhs > bound,
        witness=list(witness.coefficients),
        deltas=system.deltas(),
    )


@register_criterion("consistent")
def check_consistent(system: CyclicSystem) -> Verdict:
    deltas = system.deltas()
    offending = [(i, d) for i, d in enumerate(deltas, start=1) if d != 0]
    if offending:
        raise NotConsistentlyConnected(offending)
    lhs, witness = s1_witness(system.corrs())
    bound = Fraction(system.rank - 2)
    return Verdict(
        kind="consistent",
        lhs=lhs,
        bound=bound,
        contextual=lhs > bound,
        witness=list(witness.coefficients),
        deltas=deltas,
    )


@register_criterion("necessary")
def check_necessary(system: CyclicSystem) -> Verdict:
    """
    s1(corr) - sum|Δ_i| > n - 2 certifies contextuality. The converse is not
    established, so a holding inequality is reported as inconclusive.
    """
    deltas = system.deltas()
    s1_value, witness = s1_witness(system.corrs())
    lhs = s1_value - sum((abs(d) for d in deltas), Fraction(0))
    bound = Fraction(system.rank - 2)
    contextual = lhs > bound
    return Verdict(
        kind="necessary",
        lhs=lhs,
        bound=bound,
        contextual=contextual,
        inconclusive=not contextual,
        witness=list(witness.coefficients),
        deltas=deltas,
    )


# ---------------------------------------------------------------------------
# KCBS form
# ---------------------------------------------------------------------------


def kcbs_system(p: Sequence[Number]) -> CyclicSystem:
    """Rank-5 consistently connected system with Pr[R_i = +1] = p_i and zero overlap."""
    ps = _kcbs_inputs(p)
    contexts = []
    for i in range(5):
        a, b = ps[i], ps[(i + 1) % 5]
        contexts.append(ContextMoments(e_ii=2 * a - 1, e_next=2 * b - 1, corr=1 - 2 * (a + b)))
    return CyclicSystem(labels=tuple(f"q{i}" for i in range(1, 6)), contexts=tuple(contexts))


def _kcbs_inputs(p: Sequence[Number]) -> list[Fraction]:
    if len(p) != 5:
        raise DomainError(f"KCBS form takes 5 probabilities, got {len(p)}")
    ps = [to_fraction(v) for v in p]
    for i, v in enumerate(ps, start=1):
        if not 0 <= v <= 1:
            raise DomainError(f"p{i}={v} outside [0, 1]")
    for i in range(5):
        total = ps[i] + ps[(i + 1) % 5]
        if total > 1:
            raise OverlapViolation(i + 1, total)
    return ps


def check_kcbs(p: Sequence[Number]) -> Verdict:
    """K = sum p_i <= 2, cross-checked against the consistent criterion of the induced system."""
    ps = _kcbs_inputs(p)
    k = sum(ps, Fraction(0))
    bound = Fraction(2)
    contextual = k > bound
    induced = check_consistent(kcbs_system(ps))
    if induced.contextual != contextual:
        raise CrossCheckError(f"KCBS sum {k} disagrees with s1 = {induced.lhs}")
    return Verdict(
        kind="kcbs",
        lhs=k,
        bound=bound,
        contextual=contextual,
        witness=induced.witness,
        deltas=[Fraction(0)] * 5,
    )


def kcbs_probabilities(system: CyclicSystem) -> list[Fraction]:
    """Read p_i = Pr[R_i = +1] off a consistently connected zero-overlap rank-5 system."""
    if system.rank != 5:
        raise DomainError(f"KCBS form needs rank 5, got {system.rank}")
    offending = [(i, d) for i, d in enumerate(system.deltas(), start=1) if d != 0]
    if offending:
        raise NotConsistentlyConnected(offending)
    for i, ctx in enumerate(system.contexts, start=1):
        both_plus = (1 + ctx.e_ii + ctx.e_next + ctx.corr) / 4
        if both_plus != 0:
            raise ZeroOverlapViolation(i, both_plus)
    return [(1 + ctx.e_ii) / 2 for ctx in system.contexts]


@register_criterion("kcbs")
def check_kcbs_system(system: CyclicSystem) -> Verdict:
    return check_kcbs(kcbs_probabilities(system))


# ---------------------------------------------------------------------------
# Interval-valued data
# ---------------------------------------------------------------------------


def interval_verdict(
    box: "MomentBox",
    mode: BoxMode = "conservative",
    *,
    spacing: Number = DEFAULT_GRID_SPACING,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
) -> IntervalVerdict:
    """
    Propagate a moment box through s1(corr) - sum|Δ_i|.

    Δ intervals are on the signed difference; their magnitudes range from the
    distance of 0 to the interval up to its farthest endpoint.
    """
    s1_lo, s1_hi = s1_box_range(Box(tuple(box.corr)), mode, spacing=spacing, max_points=max_points)
    mags = [iv.abs_range() for iv in box.delta]
    d_min = sum((lo for lo, _ in mags), Fraction(0))
    d_max = sum((hi for _, hi in mags), Fraction(0))
    lo, hi = s1_lo - d_max, s1_hi - d_min
    bound = Fraction(len(box.corr) - 2)
    logger.debug("interval verdict: s1 in [%s, %s], sum|Δ| in [%s, %s]", s1_lo, s1_hi, d_min, d_max)
    return IntervalVerdict(
        lo=lo,
        hi=hi,
        bound=bound,
        certified=lo > bound,
        mode=mode,
        s1_lo=s1_lo,
        s1_hi=s1_hi,
        delta_abs_max=d_max,
        delta_abs_min=d_min,
    )
