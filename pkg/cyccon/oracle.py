"""
Brute-force check for the existence of a maximally noncontextual coupling.

The coupling is searched for directly as a nonnegative vector of atom masses
over all 2^(2n) assignments, with an exact phase-1 simplex (Bland's rule).
Nothing here uses the s1 machinery, so it can arbitrate the closed-form
criterion.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from cyccon.errors import NotConsistentlyConnected, RankTooLarge
from cyccon.joint import JointDistribution
from cyccon.model import CyclicSystem

logger = logging.getLogger(__name__)

DEFAULT_MAX_RANK = 6


@dataclass(frozen=True)
class FeasibilityProblem:
    """A x = b, x >= 0 over atom masses; rows are moment constraints."""

    variables: tuple[str, ...]
    atoms: tuple[tuple[int, ...], ...]
    rows: tuple[tuple[int, ...], ...]
    rhs: tuple[Fraction, ...]
    row_labels: tuple[str, ...]


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    joint: JointDistribution | None = None
    certificate: tuple[Fraction, ...] | None = None
    row_labels: tuple[str, ...] = ()
    pivots: int = 0
    note: str = ""


# ---------------------------------------------------------------------------
# Constraint construction
# ---------------------------------------------------------------------------


def _variables(n: int) -> tuple[str, ...]:
    out: list[str] = []
    for i in range(1, n + 1):
        out.append(f"S{i}_c{i}")
        out.append(f"S{i % n + 1}_c{i}")
    return tuple(out)


def build_problem(system: CyclicSystem, *, traditional: bool = False) -> FeasibilityProblem:
    """
    Constraint rows: normalization, three moments per context, and one
    product moment per connection. The connection target is the largest
    correlation the two marginals allow, or 1 in the traditional variant.
    """
    n = system.rank
    k = 2 * n
    atoms = tuple(itertools.product((1, -1), repeat=k))

    rows: list[tuple[int, ...]] = [tuple(1 for _ in atoms)]
    rhs: list[Fraction] = [Fraction(1)]
    labels: list[str] = ["normalization"]

    for i, ctx in enumerate(system.contexts):
        first, second = 2 * i, 2 * i + 1
        rows.append(tuple(a[first] for a in atoms))
        rhs.append(ctx.e_ii)
        labels.append(f"context {i + 1}: first mean")
        rows.append(tuple(a[second] for a in atoms))
        rhs.append(ctx.e_next)
        labels.append(f"context {i + 1}: second mean")
        rows.append(tuple(a[first] * a[second] for a in atoms))
        rhs.append(ctx.corr)
        labels.append(f"context {i + 1}: product")

    for i in range(n):
        here = 2 * i                   # R_i in context i
        there = (2 * i - 1) % k        # R_i in context i-1
        diff = system.contexts[i].e_ii - system.contexts[i - 1].e_next
        target = Fraction(1) if traditional else 1 - abs(diff)
        rows.append(tuple(a[here] * a[there] for a in atoms))
        rhs.append(target)
        labels.append(f"connection {i + 1}: product")

    return FeasibilityProblem(
        variables=_variables(n),
        atoms=atoms,
        rows=tuple(rows),
        rhs=tuple(rhs),
        row_labels=tuple(labels),
    )


# ---------------------------------------------------------------------------
# Exact phase-1 simplex
# ---------------------------------------------------------------------------

# Pricing runs in int64 while |w . A_j| provably stays below this.
_INT64_SAFE = 2**62


def _integer_rows(
    rows: Sequence[Sequence[int]],
    rhs: Sequence[Fraction],
) -> tuple[list[list[int]], list[int], list[int]]:
    """Scale each row by its rhs denominator (negated for b < 0) so A and b >= 0 are integral."""
    scaled: list[list[int]] = []
    b: list[int] = []
    multipliers: list[int] = []
    for row, v in zip(rows, rhs):
        v = Fraction(v)
        k = -v.denominator if v < 0 else v.denominator
        scaled.append([k * a for a in row])
        b.append(int(v * k))
        multipliers.append(k)
    return scaled, b, multipliers


@dataclass
class _Basis:
    """
    Fraction-free basis state: ``inverse`` is det(B) * B^-1 and ``values`` is
    det(B) * x_B, both integral over the positive common denominator ``det``.
    Pivots follow the integer-preserving (Bareiss) update, so every division
    is exact.
    """

    inverse: list[list[int]]
    values: list[int]
    basis: list[int]
    det: int = 1
    pivots: int = field(default=0)

    @classmethod
    def artificial(cls, b: list[int], cols: int) -> "_Basis":
        m = len(b)
        return cls(
            inverse=[[int(i == c) for c in range(m)] for i in range(m)],
            values=list(b),
            basis=[cols + i for i in range(m)],
        )

    def duals(self, cols: int) -> list[int]:
        """det * y for the phase-1 cost (1 on artificials, 0 elsewhere)."""
        w = [0] * len(self.basis)
        for row, b in zip(self.inverse, self.basis):
            if b >= cols:
                w = [acc + v for acc, v in zip(w, row)]
        return w

    def column(self, a: Sequence[int]) -> list[int]:
        return [sum(v * x for v, x in zip(row, a) if x) for row in self.inverse]

    def leaving(self, alpha: Sequence[int]) -> int | None:
        best: tuple[Fraction, int, int] | None = None
        for i, a in enumerate(alpha):
            if a > 0:
                cand = (Fraction(self.values[i], a), self.basis[i], i)
                if best is None or cand < best:
                    best = cand
        return None if best is None else best[2]

    def pivot(self, r: int, j: int, alpha: Sequence[int]) -> None:
        p, d = alpha[r], self.det
        pivot_row, x_r = self.inverse[r], self.values[r]
        for i, a in enumerate(alpha):
            if i == r:
                continue
            self.inverse[i] = [(p * v - a * u) // d for v, u in zip(self.inverse[i], pivot_row)]
            self.values[i] = (p * self.values[i] - a * x_r) // d
        self.det = p
        self.basis[r] = j
        self.pivots += 1


class _Pricing:
    """First column with negative phase-1 reduced cost, i.e. w . A_j > 0."""

    def __init__(self, rows: list[list[int]]) -> None:
        self.matrix = np.array(rows, dtype=np.int64)
        self.column_norm = int(np.abs(self.matrix).sum(axis=0).max())
        self._objects: np.ndarray | None = None

    def first_improving(self, w: Sequence[int]) -> int | None:
        if max(abs(v) for v in w) * self.column_norm < _INT64_SAFE:
            scores = np.asarray(w, dtype=np.int64) @ self.matrix
        else:
            if self._objects is None:
                self._objects = self.matrix.astype(object)
            scores = np.array(list(w), dtype=object) @ self._objects
        hits = np.flatnonzero(np.asarray(scores > 0, dtype=bool))
        return int(hits[0]) if hits.size else None

    def column(self, j: int) -> list[int]:
        return self.matrix[:, j].tolist()


def _phase_one(rows: Sequence[Sequence[int]], rhs: Sequence[Fraction]) -> tuple[_Basis, list[int], int]:
    a, b, multipliers = _integer_rows(rows, rhs)
    cols = len(a[0])
    state = _Basis.artificial(b, cols)
    pricing = _Pricing(a)

    # Bland: lowest-index entering column (atoms before artificials), ties on
    # the ratio broken by lowest basic index.
    while True:
        w = state.duals(cols)
        j = pricing.first_improving(w)
        if j is not None:
            alpha = state.column(pricing.column(j))
        else:
            # artificial i prices at 1 - w_i / det
            art = next((i for i, v in enumerate(w) if v > state.det), None)
            if art is None:
                break
            j = cols + art
            alpha = [row[art] for row in state.inverse]
        r = state.leaving(alpha)
        if r is None:
            raise RuntimeError("phase-1 objective unbounded")
        state.pivot(r, j, alpha)
    return state, multipliers, cols


def solve(problem: FeasibilityProblem) -> OracleResult:
    state, multipliers, cols = _phase_one(problem.rows, problem.rhs)
    d = state.det
    residual = Fraction(sum(v for v, b in zip(state.values, state.basis) if b >= cols), d)
    logger.debug("phase 1 finished after %d pivots, residual %s", state.pivots, residual)

    if residual == 0:
        x = [Fraction(0)] * cols
        for v, b in zip(state.values, state.basis):
            if b < cols:
                x[b] = Fraction(v, d)
        mass = {a: x[j] for j, a in enumerate(problem.atoms)}
        joint = JointDistribution.from_mapping(problem.variables, mass)
        return OracleResult(feasible=True, joint=joint, row_labels=problem.row_labels, pivots=state.pivots)

    # Phase-1 duals y = w / det on the scaled rows; z = -y mapped back to the
    # original rows satisfies z.A >= 0 and z.b < 0.
    w = state.duals(cols)
    cert = tuple(Fraction(-w[i] * multipliers[i], d) for i in range(len(w)))
    return OracleResult(
        feasible=False,
        certificate=cert,
        row_labels=problem.row_labels,
        pivots=state.pivots,
    )


def verify_certificate(problem: FeasibilityProblem, certificate: Sequence[Fraction]) -> bool:
    """Farkas check: certificate.A >= 0 on every atom column and certificate.b < 0."""
    for j in range(len(problem.atoms)):
        if sum((z * row[j] for z, row in zip(certificate, problem.rows)), Fraction(0)) < 0:
            return False
    return sum((z * b for z, b in zip(certificate, problem.rhs)), Fraction(0)) < 0


def verify_solution(problem: FeasibilityProblem, joint: JointDistribution) -> bool:
    x = joint.probs
    return all(
        sum((v * p for v, p in zip(row, x) if p), Fraction(0)) == b
        for row, b in zip(problem.rows, problem.rhs)
    )


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def _check_rank(system: CyclicSystem, max_rank: int) -> None:
    if system.rank > max_rank:
        raise RankTooLarge(system.rank, max_rank)


def feasible(system: CyclicSystem, *, max_rank: int = DEFAULT_MAX_RANK) -> OracleResult:
    """Does a coupling with maximal connections exist? Yes with a joint, no with a certificate."""
    _check_rank(system, max_rank)
    return solve(build_problem(system))


def feasible_traditional(
    system: CyclicSystem,
    *,
    max_rank: int = DEFAULT_MAX_RANK,
    force: bool = False,
) -> OracleResult:
    """
    Coupling in which every connection pair is equal with probability 1.
    Impossible when a connection's two distributions differ, so such systems
    are rejected unless ``force`` asks for the trivial answer.
    """
    _check_rank(system, max_rank)
    n = system.rank
    offending = []
    for i in range(n):
        diff = system.contexts[i].e_ii - system.contexts[i - 1].e_next
        if diff != 0:
            offending.append((i + 1, diff))
    if offending:
        if not force:
            raise NotConsistentlyConnected(offending)
        return OracleResult(feasible=False, note="connection distributions differ; Pr[S = S'] < 1 in every coupling")
    return solve(build_problem(system, traditional=True))
