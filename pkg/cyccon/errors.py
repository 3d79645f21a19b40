from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from cyccon.sfunc import SignVector


# ---------------------------------------------------------------------------
# Base classes (exit codes are part of the CLI contract)
# ---------------------------------------------------------------------------


class CycconError(Exception):
    """Base class for every error the library raises on purpose."""

    exit_code: int = 1


class InputError(CycconError):
    """Malformed or unrealizable input (exit 1)."""

    exit_code = 1


class PreconditionError(CycconError):
    """Well-formed input that the requested operation does not accept (exit 2)."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Input errors
# ---------------------------------------------------------------------------


class LayoutError(InputError):
    def __init__(self, issues: Sequence[object]) -> None:
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues) or "invalid layout")


class SystemFormatError(InputError):
    pass


class InfeasibleContext(InputError):
    """A context's moments violate the two-variable realizability bounds."""

    def __init__(self, index: int, lower: Fraction, upper: Fraction, corr: Fraction) -> None:
        self.index = index
        self.lower = lower
        self.upper = upper
        self.corr = corr
        super().__init__(
            f"context {index}: corr={corr} outside realizable interval [{lower}, {upper}]"
        )


class RecordsError(InputError):
    pass


class TooFewReplications(InputError):
    def __init__(self, context: int, count: int) -> None:
        self.context = context
        self.count = count
        super().__init__(f"context {context}: {count} replication(s), need at least 2")


class DomainError(InputError):
    pass


class EmptyInput(InputError):
    def __init__(self, what: str = "vector") -> None:
        super().__init__(f"empty {what}")


class NonPositiveSpacing(InputError):
    def __init__(self, spacing: object) -> None:
        super().__init__(f"grid spacing must be > 0, got {spacing}")


# ---------------------------------------------------------------------------
# Precondition errors
# ---------------------------------------------------------------------------


class MultipleCycles(PreconditionError):
    def __init__(self, count: int) -> None:
        self.count = count
        super().__init__(f"layout decomposes into {count} cycles; analyze them separately")


class NotConsistentlyConnected(PreconditionError):
    def __init__(self, offending: Sequence[tuple[int, Fraction]]) -> None:
        self.offending = list(offending)
        listed = ", ".join(f"Δ{i}={d}" for i, d in self.offending)
        super().__init__(f"system is not consistently connected: {listed}")


class OverlapViolation(PreconditionError):
    def __init__(self, index: int, total: Fraction) -> None:
        self.index = index
        super().__init__(f"p{index} + p{index % 5 + 1} = {total} > 1")


class ZeroOverlapViolation(PreconditionError):
    def __init__(self, index: int, mass: Fraction) -> None:
        self.index = index
        super().__init__(f"context {index}: Pr[both +1] = {mass}, KCBS form needs 0")


class ConservativeModeInapplicable(PreconditionError):
    def __init__(self) -> None:
        super().__init__(
            "conservative mode needs a box on which no point has a positive product; use grid mode"
        )


class GridTooLarge(PreconditionError):
    def __init__(self, points: int, cap: int) -> None:
        super().__init__(f"grid has {points} points, cap is {cap}; increase spacing")


class RankTooLarge(PreconditionError):
    def __init__(self, rank: int, cap: int) -> None:
        super().__init__(f"rank {rank} exceeds cap {cap}")


class TooManyVariables(PreconditionError):
    def __init__(self, count: int, cap: int) -> None:
        super().__init__(f"{count} variables exceeds the joint-table cap {cap}")


class InfeasiblePair(PreconditionError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"infeasible pair: {detail}")


class InfeasibleTriple(PreconditionError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"infeasible triple: {detail}")


class MarginalMismatch(PreconditionError):
    def __init__(self, index: int, detail: str) -> None:
        self.index = index
        super().__init__(f"tables {index} and {index + 1} disagree: {detail}")


class ZeroVariance(PreconditionError):
    def __init__(self) -> None:
        super().__init__("both standard errors are zero")


# ---------------------------------------------------------------------------
# Results and bugs
# ---------------------------------------------------------------------------


class InfeasibleCycle(CycconError):
    """No joint exists; carries the violated s1 instance."""

    exit_code = 3

    def __init__(self, lhs: Fraction, bound: Fraction, witness: "SignVector") -> None:
        self.lhs = lhs
        self.bound = bound
        self.witness = witness
        super().__init__(f"s1 = {lhs} > {bound}; witness {list(witness.coefficients)}")


class EmptyIntervalError(RuntimeError):
    """A construction interval that must be nonempty came out empty."""


class CrossCheckError(RuntimeError):
    """Two independent computations of the same decision disagree."""
