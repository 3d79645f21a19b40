"""
Rank-5 KCBS experiment with photons: published point estimates with their
printed +-14-standard-error half-widths, 20 replications each.
"""

from __future__ import annotations

from fractions import Fraction

from cyccon.model import ContextMoments, CyclicSystem
from cyccon.stats.moments import EstimatedMoment, MomentTerms
from cyccon.stats.source import MarginalPair, MomentDataset, register_dataset

# Half-widths are printed as 14 * se.
PRINTED_FACTOR = 14
REPLICATIONS = 20

# (point, half-width)
CORRELATIONS: tuple[tuple[str, str], ...] = (
    ("-0.805", "0.028"),
    ("-0.804", "0.042"),
    ("-0.709", "0.042"),
    ("-0.810", "0.028"),
    ("-0.766", "0.028"),
)
DELTAS: tuple[tuple[str, str], ...] = (
    ("-0.036", "0.101"),
    ("-0.004", "0.140"),
    ("0.006", "0.126"),
    ("-0.020", "0.080"),
    ("-0.006", "0.080"),
)

# connection -> ((<R_i^i>, se), (<R_i^(i-1)>, se))
MARGINALS: dict[int, tuple[tuple[str, str], tuple[str, str]]] = {
    1: (("0.136", "0.006"), ("0.172", "0.004")),
    4: (("0.122", "0.004"), ("0.142", "0.004")),
}


def _from_half_width(point: str, half_width: str) -> EstimatedMoment:
    return EstimatedMoment(
        point=Fraction(point),
        se=Fraction(half_width) / PRINTED_FACTOR,
        df=REPLICATIONS - 1,
    )


@register_dataset("lapkiewicz")
class Lapkiewicz(MomentDataset):
    @property
    def name(self) -> str:
        return "lapkiewicz"

    @property
    def df(self) -> int:
        return REPLICATIONS - 1

    def terms(self) -> MomentTerms:
        return MomentTerms(
            corr=[_from_half_width(p, h) for p, h in CORRELATIONS],
            delta=[_from_half_width(p, h) for p, h in DELTAS],
        )

    def marginals(self) -> list[MarginalPair]:
        df = self.df
        return [
            MarginalPair(
                connection=i,
                here=EstimatedMoment(point=Fraction(a), se=Fraction(sa), df=df),
                before=EstimatedMoment(point=Fraction(b), se=Fraction(sb), df=df),
            )
            for i, ((a, sa), (b, sb)) in sorted(MARGINALS.items())
        ]

    def point_system(self) -> CyclicSystem:
        """
        Only the Δ's are published, so each connection is split symmetrically:
        <R_i^i> = Δ_i / 2 and <R_i^(i-1)> = -Δ_i / 2.
        """
        deltas = [Fraction(p) for p, _ in DELTAS]
        n = len(deltas)
        contexts = tuple(
            ContextMoments(
                e_ii=deltas[i] / 2,
                e_next=-deltas[(i + 1) % n] / 2,
                corr=Fraction(CORRELATIONS[i][0]),
            )
            for i in range(n)
        )
        return CyclicSystem(labels=tuple(f"q{i}" for i in range(1, n + 1)), contexts=contexts)


def lapkiewicz_dataset() -> Lapkiewicz:
    return Lapkiewicz()
