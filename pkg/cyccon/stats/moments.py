from __future__ import annotations

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from cyccon.coupling import PairMoments, pair_table
from cyccon.errors import (
    InfeasibleContext,
    MultipleCycles,
    RecordsError,
    SystemFormatError,
    TooFewReplications,
)
from cyccon.exact import Rational, to_fraction
from cyccon.model import (
    CyclicSystem,
    MomentEntry,
    SystemFile,
    SystemLayout,
    build_cyclic_system,
    decompose_cycles,
    match_moments,
    pair_bounds,
)

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ("replication", "context", "outcome_first", "outcome_second")


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


class EstimatedMoment(BaseModel):
    """Mean over replications with its standard error."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    point: Rational
    se: Rational = Field(description="Standard error of the mean (sample sd / sqrt(k)).")
    df: int = Field(ge=1, description="Replications - 1.")

    @field_validator("se")
    @classmethod
    def _nonnegative(cls, v: Fraction) -> Fraction:
        if v < 0:
            raise ValueError(f"standard error {v} < 0")
        return v


class ContextEstimate(BaseModel):
    """Estimates of <R_i^i>, <R_{i+1}^i> and their product for one context."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    context: int
    first: EstimatedMoment
    second: EstimatedMoment
    corr: EstimatedMoment


class MomentTerms(BaseModel):
    """The 2n terms entering the interval test: corr_i per context and Δ_i per connection."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    corr: list[EstimatedMoment]
    delta: list[EstimatedMoment]

    @property
    def rank(self) -> int:
        return len(self.corr)


# ---------------------------------------------------------------------------
# Trial records
# ---------------------------------------------------------------------------


class TrialRecords:
    """
    One row per trial: replication id, 1-based context index and the two
    +-1 outcomes (R_i^i first, R_{i+1}^i second).
    """

    def __init__(self, frame: pd.DataFrame, *, rank: int | None = None) -> None:
        missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
        if missing:
            raise RecordsError(f"missing column(s): {missing}")
        frame = frame.loc[:, list(RECORD_COLUMNS)]
        if frame.empty:
            raise RecordsError("no trial rows")

        for col in ("context", "outcome_first", "outcome_second"):
            if not pd.api.types.is_integer_dtype(frame[col]):
                raise RecordsError(f"column {col!r} must hold integers")
        bad = ~frame["outcome_first"].isin((-1, 1)) | ~frame["outcome_second"].isin((-1, 1))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise RecordsError(f"row {row + 1}: outcomes must be -1 or 1")

        seen = set(int(c) for c in frame["context"].unique())
        n = rank if rank is not None else max(seen)
        if n < 2:
            raise RecordsError(f"rank {n} < 2")
        outside = sorted(c for c in seen if not 1 <= c <= n)
        if outside:
            raise RecordsError(f"context index out of range 1..{n}: {outside}")
        absent = [c for c in range(1, n + 1) if c not in seen]
        if absent:
            raise RecordsError(f"no trials for context(s) {absent}")

        self.frame = frame.reset_index(drop=True)
        self.rank = n

    def __len__(self) -> int:
        return len(self.frame)


def read_records_csv(path: str | Path, *, rank: int | None = None) -> TrialRecords:
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise RecordsError(f"{path}: {e}") from e
    return TrialRecords(frame, rank=rank)


def write_records_csv(records: TrialRecords, path: str | Path) -> None:
    records.frame.to_csv(path, index=False)


def _estimate(values: Sequence[Fraction]) -> EstimatedMoment:
    k = len(values)
    mean = sum(values, Fraction(0)) / k
    var = sum(((v - mean) ** 2 for v in values), Fraction(0)) / (k - 1)
    se = Fraction(0) if var == 0 else to_fraction(math.sqrt(float(var / k)))
    return EstimatedMoment(point=mean, se=se, df=k - 1)


def estimate_moments(records: TrialRecords) -> list[ContextEstimate]:
    """
    Per replication take the within-replication mean of each term; report the
    mean over replications with se = sd / sqrt(k) and df = k - 1.
    """
    frame = records.frame.assign(product=records.frame["outcome_first"] * records.frame["outcome_second"])
    grouped = (
        frame.groupby(["context", "replication"], sort=True)
        .agg(
            first=("outcome_first", "sum"),
            second=("outcome_second", "sum"),
            product=("product", "sum"),
            trials=("product", "size"),
        )
        .reset_index()
    )

    out: list[ContextEstimate] = []
    for ctx in range(1, records.rank + 1):
        rows = grouped[grouped["context"] == ctx]
        if len(rows) < 2:
            raise TooFewReplications(ctx, len(rows))
        trials = [int(t) for t in rows["trials"]]

        def _means(col: str) -> list[Fraction]:
            return [Fraction(int(s), t) for s, t in zip(rows[col], trials)]

        out.append(
            ContextEstimate(
                context=ctx,
                first=_estimate(_means("first")),
                second=_estimate(_means("second")),
                corr=_estimate(_means("product")),
            )
        )
    return out


def simulate_records(
    system: CyclicSystem,
    *,
    replications: int,
    trials: int,
    seed: int | None = None,
) -> TrialRecords:
    """Draw trials for every context from its two-variable table with a seeded generator."""
    if replications < 1 or trials < 1:
        raise RecordsError("replications and trials must be >= 1")
    rng = np.random.default_rng(seed)
    outcomes = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int64)

    parts: list[pd.DataFrame] = []
    for i, ctx in enumerate(system.contexts, start=1):
        table = pair_table(PairMoments(eA=ctx.e_ii, eB=ctx.e_next, eAB=ctx.corr))
        probs = np.array([float(p) for p in table.probs])
        probs /= probs.sum()
        draws = rng.choice(4, size=(replications, trials), p=probs)
        picked = outcomes[draws.ravel()]
        parts.append(
            pd.DataFrame(
                {
                    "replication": np.repeat(np.arange(1, replications + 1), trials),
                    "context": i,
                    "outcome_first": picked[:, 0],
                    "outcome_second": picked[:, 1],
                }
            )
        )
    return TrialRecords(pd.concat(parts, ignore_index=True), rank=system.rank)


# ---------------------------------------------------------------------------
# From estimates to criterion inputs
# ---------------------------------------------------------------------------


def _combine_se(a: Fraction, b: Fraction) -> Fraction:
    sq = a * a + b * b
    return Fraction(0) if sq == 0 else to_fraction(math.sqrt(float(sq)))


def terms_from_estimates(estimates: Sequence[ContextEstimate]) -> MomentTerms:
    """corr_i as estimated; Δ_i = <R_i^i> - <R_i^(i-1)> with standard errors in quadrature."""
    n = len(estimates)
    delta: list[EstimatedMoment] = []
    for i in range(n):
        here, before = estimates[i].first, estimates[i - 1].second
        delta.append(
            EstimatedMoment(
                point=here.point - before.point,
                se=_combine_se(here.se, before.se),
                df=min(here.df, before.df),
            )
        )
    return MomentTerms(corr=[e.corr for e in estimates], delta=delta)


def system_from_estimates(
    estimates: Sequence[ContextEstimate],
    *,
    labels: Sequence[str] | None = None,
    clamp: bool = False,
) -> CyclicSystem:
    """
    Point-estimate system. Correlations outside their realizable interval are
    reported; they reach the criterion only when ``clamp`` projects them.
    """
    n = len(estimates)
    names = list(labels) if labels is not None else [f"q{i}" for i in range(1, n + 1)]
    entries: list[MomentEntry] = []
    for i, est in enumerate(estimates):
        lo, hi = pair_bounds(est.first.point, est.second.point)
        if not lo <= est.corr.point <= hi:
            logger.warning(
                "context %d: estimated corr %s outside realizable [%s, %s]",
                i + 1, est.corr.point, lo, hi,
            )
            if not clamp:
                raise InfeasibleContext(i + 1, lo, hi, est.corr.point)
        entries.append(
            MomentEntry(
                context=[names[i], names[(i + 1) % n]],
                e_first=est.first.point,
                e_second=est.second.point,
                corr=est.corr.point,
            )
        )
    layout = SystemLayout(properties=names, contexts=[e.context for e in entries])
    return build_cyclic_system(layout, entries, clamp=clamp)


def estimates_from_system_file(sf: SystemFile, *, df: int) -> list[ContextEstimate]:
    """Context estimates from a System JSON whose moment entries carry ``se`` objects."""
    if df < 1:
        raise SystemFormatError(f"df must be >= 1, got {df}")
    cycles = decompose_cycles(sf.layout)
    if len(cycles) != 1:
        raise MultipleCycles(len(cycles))
    pool: list[MomentEntry | None] = list(sf.moments)
    out: list[ContextEstimate] = []
    for i, (entry, reverse) in enumerate(match_moments(cycles[0], pool), start=1):
        se = entry.se
        if se is None or se.e_first is None or se.e_second is None or se.corr is None:
            raise SystemFormatError(f"context {i}: standard errors missing")
        first = EstimatedMoment(point=entry.e_first, se=se.e_first, df=df)
        second = EstimatedMoment(point=entry.e_second, se=se.e_second, df=df)
        if reverse:
            first, second = second, first
        out.append(
            ContextEstimate(
                context=i,
                first=first,
                second=second,
                corr=EstimatedMoment(point=entry.corr, se=se.corr, df=df),
            )
        )
    return out
