"""
Explicit joint distributions for +-1 variables: two-variable tables, three-
variable joints, Markov chains, cycles, and the maximal coupling of a cyclic
system. Everything is exact rational arithmetic; no tolerances.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

from pydantic import BaseModel, ConfigDict

from cyccon.errors import (
    DomainError,
    EmptyIntervalError,
    InfeasibleCycle,
    InfeasiblePair,
    InfeasibleTriple,
    MarginalMismatch,
    TooManyVariables,
)
from cyccon.exact import Rational, to_fraction
from cyccon.joint import Assignment, JointDistribution, assignments
from cyccon.model import CyclicSystem, pair_bounds
from cyccon.sfunc import s0, s1_closed, s1_witness

logger = logging.getLogger(__name__)

Number = Fraction | int | str | float

DEFAULT_MAX_VARIABLES = 16


# ---------------------------------------------------------------------------
# Two variables
# ---------------------------------------------------------------------------


class PairMoments(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    eA: Rational
    eB: Rational
    eAB: Rational

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        return pair_bounds(self.eA, self.eB)

    @property
    def feasible(self) -> bool:
        lo, hi = self.bounds
        return -1 <= self.eA <= 1 and -1 <= self.eB <= 1 and lo <= self.eAB <= hi

    @property
    def equality_probability(self) -> Fraction:
        """Pr[A = B] = (1 + <AB>) / 2"""
        return (1 + self.eAB) / 2


def _check_pair(m: PairMoments, where: str = "") -> None:
    prefix = f"{where}: " if where else ""
    for name, v in (("<A>", m.eA), ("<B>", m.eB)):
        if not -1 <= v <= 1:
            raise InfeasiblePair(f"{prefix}{name}={v} outside [-1, 1]")
    lo, hi = m.bounds
    if m.eAB < lo:
        raise InfeasiblePair(f"{prefix}<AB>={m.eAB} below lower bound |<A>+<B>|-1={lo}")
    if m.eAB > hi:
        raise InfeasiblePair(f"{prefix}<AB>={m.eAB} above upper bound 1-|<A>-<B>|={hi}")


def pair_table(m: PairMoments, names: Sequence[str] = ("A", "B")) -> JointDistribution:
    """The unique 2x2 table with the given moments: (r, p-r, q-r, 1-p-q+r)."""
    _check_pair(m)
    p = (1 + m.eA) / 2
    q = (1 + m.eB) / 2
    r = (1 + m.eA + m.eB + m.eAB) / 4
    return JointDistribution(tuple(names), (r, p - r, q - r, 1 - p - q + r))


def max_pair_coupling(eA: Number, eB: Number) -> PairMoments:
    """Pair moments with <AB> at its upper bound 1 - |<A> - <B>|."""
    a, b = to_fraction(eA), to_fraction(eB)
    return PairMoments(eA=a, eB=b, eAB=1 - abs(a - b))


# ---------------------------------------------------------------------------
# Three variables
# ---------------------------------------------------------------------------


def triple_joint(
    e1: Number,
    e2: Number,
    e3: Number,
    c12: Number,
    c23: Number,
    c31: Number,
    names: Sequence[str] = ("A", "B", "C"),
) -> JointDistribution:
    """
    Joint of (A, B, C) with the given means and pairwise product moments.
    The free third-order moment is the midpoint of its feasible interval.
    """
    e = [to_fraction(v) for v in (e1, e2, e3)]
    c12_, c23_, c31_ = (to_fraction(v) for v in (c12, c23, c31))

    for label, (a, b, ab) in {
        "AB": (e[0], e[1], c12_),
        "BC": (e[1], e[2], c23_),
        "CA": (e[2], e[0], c31_),
    }.items():
        m = PairMoments(eA=a, eB=b, eAB=ab)
        if not m.feasible:
            raise InfeasibleTriple(f"pair {label} violates the two-variable bounds")
    lhs = s1_closed([c12_, c23_, c31_])
    if lhs > 1:
        raise InfeasibleTriple(f"s1(<AB>,<BC>,<CA>) = {lhs} > 1")

    base: dict[Assignment, Fraction] = {}
    theta_lo, theta_hi = Fraction(-1), Fraction(1)
    for a, b, c in assignments(3):
        v = 1 + a * e[0] + b * e[1] + c * e[2] + a * b * c12_ + b * c * c23_ + c * a * c31_
        base[(a, b, c)] = v
        if a * b * c == 1:
            theta_lo = max(theta_lo, -v)
        else:
            theta_hi = min(theta_hi, v)
    if theta_lo > theta_hi:
        raise EmptyIntervalError(f"third-moment interval [{theta_lo}, {theta_hi}] is empty")
    theta = (theta_lo + theta_hi) / 2

    mass = {abc: (v + abc[0] * abc[1] * abc[2] * theta) / 8 for abc, v in base.items()}
    return JointDistribution.from_mapping(names, mass)


# ---------------------------------------------------------------------------
# Chains and cycles
# ---------------------------------------------------------------------------


def _conditional(table: JointDistribution, given: int, value: int) -> Fraction:
    """Pr[second = value | first = given]; uniform when the condition has mass 0."""
    marginal = table.prob((given, 1)) + table.prob((given, -1))
    if marginal == 0:
        return Fraction(1, 2)
    return table.prob((given, value)) / marginal


def chain_joint(
    tables: Sequence[JointDistribution],
    *,
    max_variables: int = DEFAULT_MAX_VARIABLES,
) -> JointDistribution:
    """Glue pair tables (V1,V2), (V2,V3), ... by the Markov rule."""
    if not tables:
        raise DomainError("chain needs at least one pair table")
    for j, t in enumerate(tables, start=1):
        if t.k != 2:
            raise DomainError(f"table {j} has {t.k} variables, expected 2")
    for j in range(len(tables) - 1):
        left, right = tables[j], tables[j + 1]
        shared = left.variables[1]
        if right.variables[0] != shared:
            raise MarginalMismatch(j + 1, f"shared variable {shared!r} vs {right.variables[0]!r}")
        if left.marginal([shared]).probs != right.marginal([shared]).probs:
            raise MarginalMismatch(j + 1, f"marginal of {shared!r} differs")

    names = (tables[0].variables[0],) + tuple(t.variables[1] for t in tables)
    if len(names) > max_variables:
        raise TooManyVariables(len(names), max_variables)

    first = tables[0].marginal([names[0]])
    dist: dict[Assignment, Fraction] = {(v,): first.prob((v,)) for v in (1, -1)}
    for t in tables:
        nxt: dict[Assignment, Fraction] = {}
        for a, p in dist.items():
            for v in (1, -1):
                nxt[a + (v,)] = p * _conditional(t, a[-1], v)
        dist = nxt
    return JointDistribution.from_mapping(names, dist)


def _glue_on_pair(cycle_part: JointDistribution, triangle: JointDistribution) -> JointDistribution:
    """
    Join P over (V1..V_{m-1}) with T over (V_{m-1}, V_m, V1), conditionally
    independent given (V_{m-1}, V1). Both must induce the same pair table.
    """
    pair = triangle.marginal([triangle.variables[0], triangle.variables[2]])
    probs: list[Fraction] = []
    for a, p in cycle_part.items():
        key = (a[-1], a[0])
        denom = pair.prob(key)
        for v in (1, -1):
            if p == 0:
                probs.append(Fraction(0))
                continue
            if denom == 0:
                raise EmptyIntervalError(f"pair mass 0 at {key} where the cycle part has mass {p}")
            probs.append(p * triangle.prob((a[-1], v, a[0])) / denom)
    return JointDistribution(cycle_part.variables + (triangle.variables[1],), tuple(probs))


def _closing_interval(e: list[Fraction], c: list[Fraction]) -> tuple[Fraction, Fraction]:
    """Feasible <V_{m-1} V_1> when V_m is peeled off an m-cycle."""
    m = len(e)
    head = c[: m - 2]
    tail = [c[m - 2], c[m - 1]]
    pair_lo, pair_hi = pair_bounds(e[m - 2], e[0])
    lo = max(pair_lo, s0(tail) - 1, s0(head) - (m - 3))
    hi = min(pair_hi, 1 - s1_closed(tail), (m - 3) - s1_closed(head))
    return lo, hi


def _build_cycle(e: list[Fraction], c: list[Fraction], names: tuple[str, ...]) -> JointDistribution:
    m = len(e)
    if m == 3:
        return triple_joint(e[0], e[1], e[2], c[0], c[1], c[2], names=names)

    lo, hi = _closing_interval(e, c)
    if lo > hi:
        raise EmptyIntervalError(f"closing correlation interval [{lo}, {hi}] is empty at m={m}")
    t = (lo + hi) / 2
    logger.debug("peel %s: <%s %s> = %s from [%s, %s]", names[-1], names[-2], names[0], t, lo, hi)

    shorter = _build_cycle(e[: m - 1], c[: m - 2] + [t], names[: m - 1])
    triangle = triple_joint(
        e[m - 2], e[m - 1], e[0], c[m - 2], c[m - 1], t,
        names=(names[m - 2], names[m - 1], names[0]),
    )
    return _glue_on_pair(shorter, triangle)


def cycle_joint(
    e: Sequence[Number],
    c: Sequence[Number],
    *,
    names: Sequence[str] | None = None,
    max_variables: int = DEFAULT_MAX_VARIABLES,
) -> JointDistribution:
    """
    Joint of V1..Vm with means ``e`` and <V_i V_{i+1}> = c_i (c_m closes the
    cycle on V_m V_1). Raises :class:`InfeasibleCycle` when s1(c) > m - 2.
    """
    es = [to_fraction(v) for v in e]
    cs = [to_fraction(v) for v in c]
    m = len(es)
    if m < 3:
        raise DomainError(f"cycle needs at least 3 variables, got {m}")
    if len(cs) != m:
        raise DomainError(f"{len(cs)} correlations for {m} variables")
    if m > max_variables:
        raise TooManyVariables(m, max_variables)
    labels = tuple(names) if names is not None else tuple(f"V{i}" for i in range(1, m + 1))

    for i in range(m):
        _check_pair(PairMoments(eA=es[i], eB=es[(i + 1) % m], eAB=cs[i]), where=f"pair {i + 1}")

    lhs, witness = s1_witness(cs)
    if lhs > m - 2:
        raise InfeasibleCycle(lhs, Fraction(m - 2), witness)
    return _build_cycle(es, cs, labels)


# ---------------------------------------------------------------------------
# Maximal coupling of a cyclic system
# ---------------------------------------------------------------------------


def coupling_variables(rank: int) -> tuple[str, ...]:
    """S1_c1, S2_c1, S2_c2, S3_c2, ..., Sn_cn, S1_cn"""
    names: list[str] = []
    for i in range(1, rank + 1):
        names += [f"S{i}_c{i}", f"S{i % rank + 1}_c{i}"]
    return tuple(names)


def maximal_coupling(
    system: CyclicSystem,
    *,
    max_variables: int = DEFAULT_MAX_VARIABLES,
) -> JointDistribution:
    """
    Coupling of all 2n variables in which every context keeps its observed
    distribution and every connection pair is equal with the largest
    probability its marginals allow, 1 - |Δ_i|/2.
    """
    n = system.rank
    deltas = system.deltas()
    e: list[Fraction] = []
    c: list[Fraction] = []
    for i, ctx in enumerate(system.contexts):
        e += [ctx.e_ii, ctx.e_next]
        c += [ctx.corr, 1 - abs(deltas[(i + 1) % n])]
    try:
        return cycle_joint(e, c, names=coupling_variables(n), max_variables=max_variables)
    except InfeasibleCycle:
        # Report the violated instance in criterion argument order.
        args: list[Fraction] = []
        for ctx, d in zip(system.contexts, deltas):
            args += [ctx.corr, 1 - abs(d)]
        lhs, witness = s1_witness(args)
        raise InfeasibleCycle(lhs, Fraction(2 * n - 2), witness) from None


def verify_coupling(joint: JointDistribution, system: CyclicSystem) -> list[str]:
    """Every moment of ``system`` (and each maximal connection) the joint fails to reproduce."""
    n = system.rank
    missing = [v for v in coupling_variables(n) if v not in joint.variables]
    if missing:
        return [f"missing variable {v}" for v in missing]

    problems: list[str] = []

    def _cmp(label: str, got: Fraction, want: Fraction) -> None:
        if got != want:
            problems.append(f"{label} = {got}, expected {want}")

    for i, ctx in enumerate(system.contexts, start=1):
        j = i % n + 1
        a, b = f"S{i}_c{i}", f"S{j}_c{i}"
        _cmp(f"context {i}: <{a}>", joint.expectation(a), ctx.e_ii)
        _cmp(f"context {i}: <{b}>", joint.expectation(b), ctx.e_next)
        _cmp(f"context {i}: <{a} {b}>", joint.expectation(a, b), ctx.corr)
    for i, d in enumerate(system.deltas(), start=1):
        prev = (i - 2) % n + 1
        a, b = f"S{i}_c{i}", f"S{i}_c{prev}"
        _cmp(f"connection {i}: Pr[{a} = {b}]", joint.pr_equal(a, b), 1 - abs(d) / 2)
    return problems
