from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

Assignment = tuple[int, ...]


def assignments(k: int) -> Iterator[Assignment]:
    """All +-1 assignments to k variables; first variable most significant, +1 before -1."""
    return itertools.product((1, -1), repeat=k)


def atom_index(assignment: Sequence[int]) -> int:
    idx = 0
    for v in assignment:
        idx = idx << 1 | (v == -1)
    return idx


@dataclass(frozen=True)
class JointDistribution:
    """
    Probabilities of all 2^k assignments of k named +-1 variables, stored in
    :func:`assignments` order. Moments are computed on demand.
    """

    variables: tuple[str, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        k = len(self.variables)
        if len(set(self.variables)) != k:
            raise ValueError(f"duplicate variable names: {self.variables}")
        if len(self.probs) != 1 << k:
            raise ValueError(f"{len(self.probs)} atoms for {k} variables")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative atom probability")
        if sum(self.probs, Fraction(0)) != 1:
            raise ValueError("atom probabilities do not sum to 1")

    @classmethod
    def from_mapping(cls, variables: Sequence[str], mass: dict[Assignment, Fraction]) -> "JointDistribution":
        probs = tuple(mass.get(a, Fraction(0)) for a in assignments(len(variables)))
        return cls(tuple(variables), probs)

    @property
    def k(self) -> int:
        return len(self.variables)

    def items(self) -> Iterator[tuple[Assignment, Fraction]]:
        return zip(assignments(self.k), self.probs)

    def prob(self, assignment: Sequence[int]) -> Fraction:
        return self.probs[atom_index(assignment)]

    def _positions(self, names: Sequence[str]) -> list[int]:
        try:
            return [self.variables.index(n) for n in names]
        except ValueError:
            raise KeyError(f"unknown variable among {list(names)}") from None

    def expectation(self, *names: str) -> Fraction:
        """<V W ...>: expectation of the product of the named variables."""
        pos = self._positions(names)
        total = Fraction(0)
        for a, p in self.items():
            if p:
                sign = 1
                for j in pos:
                    sign *= a[j]
                total += sign * p
        return total

    def marginal(self, names: Sequence[str]) -> "JointDistribution":
        pos = self._positions(names)
        mass: dict[Assignment, Fraction] = {}
        for a, p in self.items():
            key = tuple(a[j] for j in pos)
            mass[key] = mass.get(key, Fraction(0)) + p
        return JointDistribution.from_mapping(names, mass)

    def pr_equal(self, a: str, b: str) -> Fraction:
        i, j = self._positions([a, b])
        return sum((p for x, p in self.items() if x[i] == x[j]), Fraction(0))

    def support(self) -> list[tuple[Assignment, Fraction]]:
        return [(a, p) for a, p in self.items() if p]
