from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from pydantic import BaseModel, ConfigDict

from cyccon.errors import DomainError, ZeroVariance
from cyccon.exact import Rational, to_fraction
from cyccon.sfunc import Box, Interval
from cyccon.stats.moments import EstimatedMoment, MomentTerms
from cyccon.stats.tdist import t_quantile

logger = logging.getLogger(__name__)

# Two-sided levels reported for the connection tests.
TEST_LEVELS = (0.001, 0.01)


class TTestResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float
    df: int
    difference: Rational
    significant_001: bool
    significant_01: bool


def two_sample_t(a: EstimatedMoment, b: EstimatedMoment, df: int) -> TTestResult:
    """t = (a - b) / sqrt(se_a^2 + se_b^2), tested two-sided at 0.1% and 1%."""
    if a.se == 0 and b.se == 0:
        raise ZeroVariance()
    diff = a.point - b.point
    t = float(diff) / math.sqrt(float(a.se * a.se + b.se * b.se))
    decisions = [abs(t) > t_quantile(1 - level / 2, df) for level in TEST_LEVELS]
    return TTestResult(t=t, df=df, difference=diff, significant_001=decisions[0], significant_01=decisions[1])


@dataclass(frozen=True)
class MomentBox:
    """
    Interval per corr_i and per signed Δ_i, with how the half-widths were set:
    either a fixed ``factor`` times the standard error or a Bonferroni
    ``quantile`` at family-wise level ``alpha``.
    """

    corr: tuple[Interval, ...]
    delta: tuple[Interval, ...]
    alpha: float | None = None
    factor: Fraction | None = None
    quantile: float | None = None

    def __post_init__(self) -> None:
        if len(self.corr) != len(self.delta):
            raise DomainError(f"{len(self.corr)} corr intervals vs {len(self.delta)} Δ intervals")

    @property
    def rank(self) -> int:
        return len(self.corr)

    def corr_box(self) -> Box:
        return Box(self.corr)


def conservative_box(
    terms: MomentTerms,
    alpha: float = 1e-10,
    factor_override: Fraction | float | int | str | None = None,
    *,
    df: int | None = None,
) -> MomentBox:
    """
    point +- q*se for each of the 2n terms. Without an override q is the
    Bonferroni quantile t(1 - alpha/2n, df); df defaults to each term's own.
    """
    if len(terms.corr) != len(terms.delta) or not terms.corr:
        raise DomainError(f"need 2n terms, got {len(terms.corr)} corr and {len(terms.delta)} Δ")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} must lie in (0, 1)")
    count = 2 * terms.rank

    if factor_override is not None:
        factor = to_fraction(factor_override)
        if factor < 0:
            raise DomainError(f"factor {factor} < 0")

        def _half(m: EstimatedMoment) -> Fraction:
            return factor * m.se

        quantile = None
    else:
        factor = None
        p = 1 - alpha / count
        cache: dict[int, Fraction] = {}

        def _half(m: EstimatedMoment) -> Fraction:
            d = df if df is not None else m.df
            if d not in cache:
                cache[d] = to_fraction(t_quantile(p, d))
            return cache[d] * m.se

        quantile = t_quantile(p, df) if df is not None else None
        logger.debug("Bonferroni level %s over %d terms, p = %r", alpha, count, p)

    return MomentBox(
        corr=tuple(Interval.around(m.point, _half(m)) for m in terms.corr),
        delta=tuple(Interval.around(m.point, _half(m)) for m in terms.delta),
        alpha=None if factor is not None else alpha,
        factor=factor,
        quantile=quantile,
    )
