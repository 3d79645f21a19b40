"""
JSON wire models for everything the CLI prints or writes.

Reported numbers are strings: half-even decimals at the configured precision,
or exact rationals under ``--exact``. Coupling probabilities are always exact.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from pathlib import Path
from typing import Literal, Sequence

from pydantic import BaseModel, Field, ValidationError

from cyccon import __version__
from cyccon.criterion import IntervalVerdict, Verdict
from cyccon.errors import SystemFormatError
from cyccon.exact import format_number, fraction_str, to_fraction
from cyccon.joint import JointDistribution, assignments
from cyccon.stats.intervals import TTestResult


class NumberFormat(BaseModel):
    precision: int = 3
    exact: bool = False

    def __call__(self, q: Fraction) -> str:
        return format_number(q, precision=self.precision, exact=self.exact)


def input_digest(*blobs: bytes) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class VerdictJson(BaseModel):
    kind: str
    cycle: list[str] = Field(default_factory=list)
    lhs: str
    bound: str
    contextual: bool
    inconclusive: bool = False
    witness: list[int] | None = None
    deltas: list[str] = Field(default_factory=list)

    @classmethod
    def from_verdict(cls, v: Verdict, fmt: NumberFormat, cycle: Sequence[str] = ()) -> "VerdictJson":
        return cls(
            kind=v.kind,
            cycle=list(cycle),
            lhs=fmt(v.lhs),
            bound=fmt(v.bound),
            contextual=v.contextual,
            inconclusive=v.inconclusive,
            witness=v.witness,
            deltas=[fmt(d) for d in v.deltas],
        )


class ConnectionTestJson(BaseModel):
    connection: int
    difference: str
    t: str
    df: int
    significant_0_1_percent: bool
    significant_1_percent: bool

    @classmethod
    def from_result(cls, connection: int, r: TTestResult, fmt: NumberFormat) -> "ConnectionTestJson":
        return cls(
            connection=connection,
            difference=fmt(r.difference),
            t=format_number(to_fraction(r.t), precision=fmt.precision),
            df=r.df,
            significant_0_1_percent=r.significant_001,
            significant_1_percent=r.significant_01,
        )


class IntervalVerdictJson(BaseModel):
    kind: Literal["interval"] = "interval"
    interval: list[str]
    bound: str
    certified: bool
    mode: str
    s1_range: list[str]
    abs_delta_sum_range: list[str]
    factor: str | None = None
    alpha: float | None = None
    quantile: str | None = None
    tests: list[ConnectionTestJson] = Field(default_factory=list)

    @classmethod
    def from_verdict(
        cls,
        v: IntervalVerdict,
        fmt: NumberFormat,
        *,
        factor: Fraction | None = None,
        alpha: float | None = None,
        quantile: float | None = None,
        tests: Sequence[ConnectionTestJson] = (),
    ) -> "IntervalVerdictJson":
        return cls(
            interval=[fmt(v.lo), fmt(v.hi)],
            bound=fmt(v.bound),
            certified=v.certified,
            mode=v.mode,
            s1_range=[fmt(v.s1_lo), fmt(v.s1_hi)],
            abs_delta_sum_range=[fmt(v.delta_abs_min), fmt(v.delta_abs_max)],
            factor=None if factor is None else fmt(factor),
            alpha=alpha,
            quantile=None if quantile is None else format_number(to_fraction(quantile), precision=6),
            tests=list(tests),
        )


class OracleJson(BaseModel):
    variant: Literal["maximal", "traditional"]
    feasible: bool
    certificate: list[str] | None = None
    row_labels: list[str] = Field(default_factory=list)
    check: VerdictJson | None = None
    agreement: Literal["AGREE", "DISAGREE"] | None = None
    note: str = ""


# ---------------------------------------------------------------------------
# Couplings
# ---------------------------------------------------------------------------


class AtomEntry(BaseModel):
    assignment: list[int]
    prob: str = Field(description="Exact probability as 'p/q'.")


class CouplingFile(BaseModel):
    """Support of a joint distribution; atoms not listed have probability 0."""

    variables: list[str]
    atoms: list[AtomEntry]

    @classmethod
    def from_joint(cls, joint: JointDistribution) -> "CouplingFile":
        return cls(
            variables=list(joint.variables),
            atoms=[AtomEntry(assignment=list(a), prob=fraction_str(p)) for a, p in joint.support()],
        )

    def to_joint(self) -> JointDistribution:
        k = len(self.variables)
        valid = set(assignments(k))
        mass: dict[tuple[int, ...], Fraction] = {}
        for atom in self.atoms:
            key = tuple(atom.assignment)
            if key not in valid:
                raise SystemFormatError(f"assignment {atom.assignment} is not a +-1 vector of length {k}")
            if key in mass:
                raise SystemFormatError(f"assignment {atom.assignment} listed twice")
            try:
                mass[key] = to_fraction(atom.prob)
            except (ValueError, ZeroDivisionError) as e:
                raise SystemFormatError(f"bad probability {atom.prob!r}: {e}") from e
        try:
            return JointDistribution.from_mapping(self.variables, mass)
        except ValueError as e:
            raise SystemFormatError(str(e)) from e


def load_coupling(path: Path) -> JointDistribution:
    try:
        cf = CouplingFile.model_validate_json(Path(path).read_bytes())
    except ValidationError as e:
        raise SystemFormatError(f"{path}: {e}") from e
    return cf.to_joint()


def dump_coupling(joint: JointDistribution, path: Path) -> None:
    Path(path).write_text(CouplingFile.from_joint(joint).model_dump_json(indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Run report
# ---------------------------------------------------------------------------


class RunReport(BaseModel):
    """Everything one CLI invocation prints to standard output."""

    command: str
    input_digest: str
    verdicts: list[VerdictJson | IntervalVerdictJson | OracleJson] = Field(default_factory=list)
    coupling: CouplingFile | None = None
    coupling_path: str | None = None
    cycles: list[list[str]] | None = None
    summary: dict[str, int] | None = None
    warnings: list[str] = Field(default_factory=list)
    version: str = __version__

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)
