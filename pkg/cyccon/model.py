from __future__ import annotations

import logging
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Callable, Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cyccon.errors import InfeasibleContext, LayoutError, MultipleCycles, SystemFormatError
from cyccon.exact import Rational

logger = logging.getLogger(__name__)

IssueKind = Literal["ContextArity", "PropertyDegree", "UnknownProperty", "DuplicateProperty"]


# ---------------------------------------------------------------------------
# Layout: properties and the contexts they are measured in
# ---------------------------------------------------------------------------


class SystemLayout(BaseModel):
    """Properties and (unordered) contexts, before any moments are attached."""

    properties: list[str]
    contexts: list[list[str]] = Field(description="Each context lists the properties measured together.")


class LayoutIssue(BaseModel):
    kind: IssueKind
    subject: str = Field(description="Offending property id, or the context as 'a,b,...'.")
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}({self.subject})" + (f": {self.detail}" if self.detail else "")


def validate_layout(layout: SystemLayout) -> list[LayoutIssue]:
    """
    Check that every context is a pair of distinct properties and that every
    property sits in exactly two contexts. Returns an empty list when valid.
    """
    issues: list[LayoutIssue] = []

    known = set(layout.properties)
    for prop, count in sorted(Counter(layout.properties).items()):
        if count > 1:
            issues.append(LayoutIssue(kind="DuplicateProperty", subject=prop, detail=f"listed {count} times"))

    degree: Counter[str] = Counter()
    for ctx in layout.contexts:
        members = set(ctx)
        label = ",".join(ctx)
        if len(ctx) != 2 or len(members) != 2:
            issues.append(
                LayoutIssue(kind="ContextArity", subject=label, detail=f"{len(members)} distinct member(s)")
            )
        for prop in sorted(members):
            if prop not in known:
                issues.append(LayoutIssue(kind="UnknownProperty", subject=prop, detail=f"in context {label}"))
            degree[prop] += 1

    for prop in sorted(known):
        if degree[prop] != 2:
            issues.append(
                LayoutIssue(kind="PropertyDegree", subject=prop, detail=f"in {degree[prop]} context(s)")
            )
    return issues


def ensure_valid_layout(layout: SystemLayout) -> None:
    issues = validate_layout(layout)
    if issues:
        raise LayoutError(issues)


def decompose_cycles(layout: SystemLayout) -> list[tuple[str, ...]]:
    """
    Split a valid layout into its cycles.

    Each cycle starts at its lexicographically least property and proceeds
    toward the lesser of that property's two neighbours; cycles are listed by
    their first property.
    """
    ensure_valid_layout(layout)

    incident: dict[str, list[tuple[str, int]]] = {p: [] for p in layout.properties}
    for edge_id, (a, b) in enumerate(layout.contexts):
        incident[a].append((b, edge_id))
        incident[b].append((a, edge_id))

    visited: set[str] = set()
    cycles: list[tuple[str, ...]] = []
    for start in sorted(layout.properties):
        if start in visited:
            continue
        cycle = [start]
        visited.add(start)
        nxt, edge = min(incident[start])
        cur = start
        while nxt != start:
            cycle.append(nxt)
            visited.add(nxt)
            cur = nxt
            nxt, edge = next((n, e) for n, e in incident[cur] if e != edge)
        cycles.append(tuple(cycle))
    return cycles


# ---------------------------------------------------------------------------
# Cyclic system with moments attached in cycle order
# ---------------------------------------------------------------------------


def pair_bounds(e_a: Fraction, e_b: Fraction) -> tuple[Fraction, Fraction]:
    """Realizable interval of <AB> for +-1 variables with means e_a, e_b."""
    return abs(e_a + e_b) - 1, 1 - abs(e_a - e_b)


class ContextMoments(BaseModel):
    """Moments of context i: <R_i^i>, <R_{i+1}^i> and their product."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    e_ii: Rational
    e_next: Rational
    corr: Rational

    @field_validator("e_ii", "e_next", "corr")
    @classmethod
    def _in_unit_range(cls, v: Fraction) -> Fraction:
        if not -1 <= v <= 1:
            raise ValueError(f"moment {v} outside [-1, 1]")
        return v


class ClampAdjustment(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    context: int
    original: Rational
    clamped: Rational


class ConnectionDelta(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int = Field(description="1-based property position in cycle order.")
    delta: Rational = Field(description="<R_i^i> - <R_i^(i-1)>")
    max_equal_corr: Rational = Field(description="1 - |delta|")

    @property
    def consistent(self) -> bool:
        return self.max_equal_corr == 1


class CyclicSystem(BaseModel):
    """
    Rank-n cyclic system. ``contexts[i-1]`` holds context c_i, which pairs
    ``labels[i-1]`` with ``labels[i % n]``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: tuple[str, ...]
    contexts: tuple[ContextMoments, ...]
    adjustments: tuple[ClampAdjustment, ...] = ()

    @model_validator(mode="after")
    def _check_shape(self) -> "CyclicSystem":
        n = len(self.labels)
        if n < 2:
            raise ValueError(f"rank {n} < 2")
        if len(self.contexts) != n:
            raise ValueError(f"{len(self.contexts)} contexts for {n} properties")
        for i, ctx in enumerate(self.contexts, start=1):
            lo, hi = pair_bounds(ctx.e_ii, ctx.e_next)
            if not lo <= ctx.corr <= hi:
                raise ValueError(f"context {i}: corr={ctx.corr} outside [{lo}, {hi}]")
        return self

    # ── derived ──────────────────────────────────────────────────────────

    @property
    def rank(self) -> int:
        return len(self.labels)

    def corrs(self) -> list[Fraction]:
        return [c.corr for c in self.contexts]

    def deltas(self) -> list[Fraction]:
        """Δ_i = <R_i^i> - <R_i^(i-1)> for i = 1..n (context 0 wraps to n)."""
        return [self.contexts[k].e_ii - self.contexts[k - 1].e_next for k in range(self.rank)]

    def connection_deltas(self) -> list[ConnectionDelta]:
        return [
            ConnectionDelta(index=i, delta=d, max_equal_corr=1 - abs(d))
            for i, d in enumerate(self.deltas(), start=1)
        ]

    def is_consistent(self) -> bool:
        return all(d == 0 for d in self.deltas())

    # ── relabelled copies ────────────────────────────────────────────────

    def _renumbered(self, where: Callable[[int], int]) -> tuple[ClampAdjustment, ...]:
        moved = (a.model_copy(update={"context": where(a.context)}) for a in self.adjustments)
        return tuple(sorted(moved, key=lambda a: a.context))

    def rotated(self, k: int) -> "CyclicSystem":
        n = self.rank
        k %= n
        return CyclicSystem(
            labels=self.labels[k:] + self.labels[:k],
            contexts=self.contexts[k:] + self.contexts[:k],
            adjustments=self._renumbered(lambda c: (c - 1 - k) % n + 1),
        )

    def reflected(self) -> "CyclicSystem":
        """Same system traversed in the opposite direction."""
        n = self.rank
        contexts = []
        for j in range(1, n + 1):
            old = self.contexts[(n - j) % n - 1]
            contexts.append(ContextMoments(e_ii=old.e_next, e_next=old.e_ii, corr=old.corr))
        return CyclicSystem(
            labels=tuple(reversed(self.labels)),
            contexts=tuple(contexts),
            # old context c becomes context j with (n - j) % n - 1 == c - 1 (mod n)
            adjustments=self._renumbered(lambda c: (n - 1 - c) % n + 1),
        )


# ---------------------------------------------------------------------------
# System JSON
# ---------------------------------------------------------------------------


class MomentErrors(BaseModel):
    """Optional standard errors of one moment entry."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    e_first: Rational | None = None
    e_second: Rational | None = None
    corr: Rational | None = None


class MomentEntry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    context: list[str] = Field(description="Two property ids; e_first refers to context[0].")
    e_first: Rational
    e_second: Rational
    corr: Rational
    se: MomentErrors | None = None

    @field_validator("context")
    @classmethod
    def _two_members(cls, v: list[str]) -> list[str]:
        if len(v) != 2:
            raise ValueError(f"moment context must list 2 properties, got {len(v)}")
        return v


class SystemFile(BaseModel):
    properties: list[str]
    contexts: list[list[str]]
    moments: list[MomentEntry]

    @property
    def layout(self) -> SystemLayout:
        return SystemLayout(properties=self.properties, contexts=self.contexts)


def match_moments(
    cycle: tuple[str, ...],
    pool: list[MomentEntry | None],
) -> list[tuple[MomentEntry, bool]]:
    """Take one moment entry per cycle edge; flag entries listed in reverse order."""
    matched: list[tuple[MomentEntry, bool]] = []
    n = len(cycle)
    for i in range(n):
        a, b = cycle[i], cycle[(i + 1) % n]
        for slot, entry in enumerate(pool):
            if entry is None or set(entry.context) != {a, b}:
                continue
            matched.append((entry, entry.context[0] != a))
            pool[slot] = None
            break
        else:
            raise SystemFormatError(f"no moments supplied for context ({a}, {b})")
    return matched


def _attach(
    cycle: tuple[str, ...],
    matched: list[tuple[MomentEntry, bool]],
    *,
    clamp: bool,
) -> CyclicSystem:
    contexts: list[ContextMoments] = []
    adjustments: list[ClampAdjustment] = []
    for i, (entry, reverse) in enumerate(matched, start=1):
        e_ii, e_next = (entry.e_second, entry.e_first) if reverse else (entry.e_first, entry.e_second)
        for v in (e_ii, e_next, entry.corr):
            if not -1 <= v <= 1:
                raise SystemFormatError(f"context {i}: moment {v} outside [-1, 1]")
        corr = entry.corr
        lo, hi = pair_bounds(e_ii, e_next)
        if not lo <= corr <= hi:
            if not clamp:
                raise InfeasibleContext(i, lo, hi, corr)
            clamped = min(max(corr, lo), hi)
            logger.warning("context %d: corr %s clamped to %s", i, corr, clamped)
            adjustments.append(ClampAdjustment(context=i, original=corr, clamped=clamped))
            corr = clamped
        contexts.append(ContextMoments(e_ii=e_ii, e_next=e_next, corr=corr))
    return CyclicSystem(labels=cycle, contexts=tuple(contexts), adjustments=tuple(adjustments))


def build_cyclic_systems(
    layout: SystemLayout,
    moments: Sequence[MomentEntry],
    *,
    clamp: bool = False,
) -> list[CyclicSystem]:
    """One CyclicSystem per cycle of the layout, in canonical cycle order."""
    cycles = decompose_cycles(layout)
    pool: list[MomentEntry | None] = list(moments)
    systems = [_attach(c, match_moments(c, pool), clamp=clamp) for c in cycles]
    leftover = [e.context for e in pool if e is not None]
    if leftover:
        raise SystemFormatError(f"moments for unknown context(s): {leftover}")
    return systems


def build_cyclic_system(
    layout: SystemLayout,
    moments: Sequence[MomentEntry],
    *,
    clamp: bool = False,
) -> CyclicSystem:
    cycles = decompose_cycles(layout)
    if len(cycles) != 1:
        raise MultipleCycles(len(cycles))
    return build_cyclic_systems(layout, moments, clamp=clamp)[0]


def parse_system_json(text: str | bytes) -> SystemFile:
    return SystemFile.model_validate_json(text)


def load_systems(path: Path, *, clamp: bool = False) -> list[CyclicSystem]:
    sf = parse_system_json(Path(path).read_bytes())
    return build_cyclic_systems(sf.layout, sf.moments, clamp=clamp)


def system_file(system: CyclicSystem) -> SystemFile:
    n = system.rank
    pairs = [[system.labels[i], system.labels[(i + 1) % n]] for i in range(n)]
    moments = [
        MomentEntry(context=pair, e_first=ctx.e_ii, e_second=ctx.e_next, corr=ctx.corr)
        for pair, ctx in zip(pairs, system.contexts)
    ]
    return SystemFile(properties=list(system.labels), contexts=pairs, moments=moments)


def system_to_json(system: CyclicSystem) -> str:
    return system_file(system).model_dump_json(indent=2, exclude_none=True)
