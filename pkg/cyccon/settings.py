from __future__ import annotations

from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic.types import PositiveInt

from cyccon.exact import Rational


class CycconSettings(BaseModel):
    """Run-time knobs shared by the library and the CLI.

    Defaults reproduce the published analysis: 3 reported digits, grid spacing
    10^-3, family-wise level 10^-10.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    precision: PositiveInt = Field(
        default=3,
        description="Decimal digits in reported numbers (half-even rounding).",
    )
    max_coupling_variables: PositiveInt = Field(
        default=16,
        description="Widest joint table the coupling module will build (2^k atoms).",
    )
    oracle_max_rank: PositiveInt = Field(
        default=6,
        description="Largest rank the brute-force oracle accepts (2^(2n) atoms).",
    )
    grid_spacing: Rational = Field(
        default=Fraction(1, 1000),
        description="Grid-mode spacing h; certificate slack is n*h/2.",
    )
    max_grid_points: PositiveInt = Field(
        default=2_000_000,
        description="Grid-mode size cap (points evaluated at once).",
    )
    alpha: float = Field(
        default=1e-10,
        description="Family-wise level for conservative intervals.",
    )

    # ── validators ───────────────────────────────────────────────────────

    @field_validator("grid_spacing")
    @classmethod
    def _positive_spacing(cls, v: Fraction) -> Fraction:
        if v <= 0:
            raise ValueError(f"grid_spacing={v} must be > 0")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha_in_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"alpha={v} must lie in (0, 1)")
        return v

    @field_validator("max_coupling_variables")
    @classmethod
    def _at_least_three(cls, v: int) -> int:
        if v < 3:
            raise ValueError("max_coupling_variables must be >= 3 (smallest cycle)")
        return v
