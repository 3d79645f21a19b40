"""
The s1 / s0 functions: maxima of signed sums over odd- / even-parity sign
vectors, their closed forms, and their ranges over boxes.

Arguments are sequences of exact numbers (``Fraction`` or ``int``); the
enumeration and closed forms never round.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from cyccon.errors import (
    ConservativeModeInapplicable,
    DomainError,
    EmptyInput,
    GridTooLarge,
    NonPositiveSpacing,
)
from cyccon.exact import to_fraction

logger = logging.getLogger(__name__)

Number = Fraction | int
BoxMode = Literal["conservative", "grid"]

DEFAULT_GRID_SPACING = Fraction(1, 1000)
DEFAULT_MAX_GRID_POINTS = 2_000_000

# float64 evaluation of the grid only locates the minimizing grid point; this
# margin covers its rounding before the exact re-evaluation.
_FLOAT_SEARCH_MARGIN = Fraction(1, 10**12)


@dataclass(frozen=True)
class SignVector:
    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c not in (1, -1) for c in self.coefficients):
            raise ValueError(f"sign vector entries must be +-1: {self.coefficients}")

    @property
    def parity(self) -> int:
        return -1 if sum(c == -1 for c in self.coefficients) % 2 else 1

    def dot(self, x: Sequence[Number]) -> Number:
        return sum((c * v for c, v in zip(self.coefficients, x)), Fraction(0))

    def __len__(self) -> int:
        return len(self.coefficients)


def _require(x: Sequence[Number]) -> None:
    if len(x) == 0:
        raise EmptyInput()


def _enum(x: Sequence[Number], parity: int) -> tuple[Fraction, SignVector]:
    """
    Walk all sign vectors in Gray-code order (one flip per step) and keep the
    best one of the requested parity. Ties go to the lexicographically least
    vector with +1 < -1, i.e. the smallest mask with coordinate 0 as MSB.
    """
    n = len(x)
    xs = [to_fraction(v) for v in x]
    total = sum(xs, Fraction(0))
    want_odd = parity == -1

    best: Fraction | None = None
    best_mask = 0
    if not want_odd:
        best, best_mask = total, 0

    mask = 0
    for g in range(1, 1 << n):
        bit = (g & -g).bit_length() - 1
        mask ^= 1 << bit
        coord = n - 1 - bit
        if mask >> bit & 1:
            total -= 2 * xs[coord]
        else:
            total += 2 * xs[coord]
        # Gray-code popcount parity equals the parity of g.
        if (g & 1) != want_odd:
            continue
        if best is None or total > best or (total == best and mask < best_mask):
            best, best_mask = total, mask

    assert best is not None
    signs = tuple(-1 if best_mask >> (n - 1 - j) & 1 else 1 for j in range(n))
    return best, SignVector(signs)


def s1_enum(x: Sequence[Number]) -> tuple[Fraction, SignVector]:
    """Max of sum(i_k x_k) over sign vectors with an odd number of -1's, and a maximizer."""
    _require(x)
    return _enum(x, -1)


def s0_enum(x: Sequence[Number]) -> tuple[Fraction, SignVector]:
    """Max of sum(i_k x_k) over sign vectors with an even number of -1's, and a maximizer."""
    _require(x)
    return _enum(x, 1)


def _product_sign(xs: Sequence[Fraction]) -> int:
    if any(v == 0 for v in xs):
        return 0
    return -1 if sum(v < 0 for v in xs) % 2 else 1


def s1_closed(x: Sequence[Number]) -> Fraction:
    """sum|x_i| - 2 [x_1...x_n > 0] min|x_i|"""
    _require(x)
    xs = [to_fraction(v) for v in x]
    mags = [abs(v) for v in xs]
    total = sum(mags, Fraction(0))
    if _product_sign(xs) > 0:
        total -= 2 * min(mags)
    return total


def s0(x: Sequence[Number]) -> Fraction:
    """sum|x_i| - 2 [x_1...x_n < 0] min|x_i|"""
    _require(x)
    xs = [to_fraction(v) for v in x]
    mags = [abs(v) for v in xs]
    total = sum(mags, Fraction(0))
    if _product_sign(xs) < 0:
        total -= 2 * min(mags)
    return total


s1 = s1_closed


def _fast(x: Sequence[Number], parity: int) -> tuple[Fraction, SignVector]:
    """
    O(n) maximizer with the enumeration's tie rule. Signs follow x and zeros
    take +1. A wrong parity is repaired at the last zero coordinate if there
    is one (free of cost); otherwise one coordinate of least |x| is flipped,
    the first negative such coordinate or else the last one.
    """
    xs = [to_fraction(v) for v in x]
    signs = [-1 if v < 0 else 1 for v in xs]
    if (signs.count(-1) % 2 == 1) != (parity == -1):
        zeros = [k for k, v in enumerate(xs) if v == 0]
        if zeros:
            signs[zeros[-1]] = -1
        else:
            least = min(abs(v) for v in xs)
            ties = [k for k, v in enumerate(xs) if abs(v) == least]
            k = next((k for k in ties if xs[k] < 0), ties[-1])
            signs[k] = -signs[k]
    witness = SignVector(tuple(signs))
    return witness.dot(xs), witness


def s1_witness(x: Sequence[Number]) -> tuple[Fraction, SignVector]:
    """Same result as :func:`s1_enum` in O(n)."""
    _require(x)
    return _fast(x, -1)


def s0_witness(x: Sequence[Number]) -> tuple[Fraction, SignVector]:
    _require(x)
    return _fast(x, 1)


def split_identity_check(a: Sequence[Number], b: Sequence[Number]) -> bool:
    """Both concatenation identities relating s0/s1 of a||b to those of a and b."""
    ab = list(a) + list(b)
    s1_ok = s1_enum(ab)[0] == max(s0_enum(a)[0] + s1_enum(b)[0], s1_enum(a)[0] + s0_enum(b)[0])
    s0_ok = s0_enum(ab)[0] == max(s0_enum(a)[0] + s0_enum(b)[0], s1_enum(a)[0] + s1_enum(b)[0])
    return s1_ok and s0_ok


def s_pair_identity(x: Sequence[Number]) -> bool:
    """s0(x) + s1(x) == 2 sum|x_i| - 2 min|x_i|"""
    mags = [abs(to_fraction(v)) for v in x]
    return s0_enum(x)[0] + s1_enum(x)[0] == 2 * sum(mags, Fraction(0)) - 2 * min(mags)


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval lo={self.lo} > hi={self.hi}")

    @classmethod
    def around(cls, center: Number, half_width: Number) -> "Interval":
        c, h = to_fraction(center), to_fraction(half_width)
        return cls(c - h, c + h)

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, v: Number) -> bool:
        return self.lo <= v <= self.hi

    def abs_range(self) -> tuple[Fraction, Fraction]:
        """Range of |v| for v in the interval."""
        if self.lo <= 0 <= self.hi:
            low = Fraction(0)
        else:
            low = min(abs(self.lo), abs(self.hi))
        return low, max(abs(self.lo), abs(self.hi))


@dataclass(frozen=True)
class Box:
    intervals: tuple[Interval, ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Number, Number]]) -> "Box":
        return cls(tuple(Interval(to_fraction(lo), to_fraction(hi)) for lo, hi in pairs))

    @classmethod
    def point(cls, x: Sequence[Number]) -> "Box":
        return cls(tuple(Interval(to_fraction(v), to_fraction(v)) for v in x))

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, x: Sequence[Number]) -> bool:
        return len(x) == len(self) and all(iv.contains(v) for iv, v in zip(self.intervals, x))


def s1_box_max(box: Box) -> Fraction:
    """
    Exact max of s1 over a box. s1 is a max of linear forms, so per sign
    vector each coordinate independently takes its better endpoint; the
    parity is then repaired at the cheapest coordinate.
    """
    _require(box.intervals)
    total = Fraction(0)
    negatives = 0
    cheapest: Fraction | None = None
    for iv in box.intervals:
        plus, minus = iv.hi, -iv.lo
        if minus > plus:
            negatives += 1
        total += max(plus, minus)
        loss = abs(plus - minus)
        if cheapest is None or loss < cheapest:
            cheapest = loss
    if negatives % 2 == 0:
        assert cheapest is not None
        total -= cheapest
    return total


def _positive_product_attainable(box: Box) -> bool:
    signs: list[set[int]] = []
    for iv in box.intervals:
        s = set()
        if iv.hi > 0:
            s.add(1)
        if iv.lo < 0:
            s.add(-1)
        if not s:
            return False
        signs.append(s)
    if any(len(s) == 2 for s in signs):
        return True
    return math.prod(next(iter(s)) for s in signs) > 0


def _axis(iv: Interval, h: Fraction) -> list[Fraction]:
    pts = []
    v = iv.lo
    while v < iv.hi:
        pts.append(v)
        v += h
    pts.append(iv.hi)
    return pts


def _grid_min(box: Box, h: Fraction, max_points: int) -> Fraction:
    axes = [_axis(iv, h) for iv in box.intervals]
    points = math.prod(len(a) for a in axes)
    if points > max_points:
        raise GridTooLarge(points, max_points)
    logger.debug("grid mode: %d points, spacing %s", points, h)

    grids = np.meshgrid(*[np.array([float(v) for v in a]) for a in axes], indexing="ij", sparse=True)
    mags = [np.abs(g) for g in grids]
    total = sum(mags[1:], mags[0])
    smallest = mags[0]
    negatives = (grids[0] < 0).astype(np.int64)
    zero = grids[0] == 0
    for g, m in zip(grids[1:], mags[1:]):
        smallest = np.minimum(smallest, m)
        negatives = negatives + (g < 0)
        zero = zero | (g == 0)
    positive = (negatives % 2 == 0) & ~zero
    values = np.broadcast_to(total - 2.0 * positive * smallest, positive.shape)

    idx = np.unravel_index(int(np.argmin(values)), values.shape)
    at = [axes[k][int(i)] for k, i in enumerate(idx)]
    return s1_closed(at) - _FLOAT_SEARCH_MARGIN


def s1_box_range(
    box: Box,
    mode: BoxMode = "conservative",
    *,
    spacing: Number = DEFAULT_GRID_SPACING,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
) -> tuple[Fraction, Fraction]:
    """
    Range [lo, hi] of s1 over a box.

    hi is exact in both modes. In conservative mode lo is exact and the mode
    refuses boxes containing a point with positive product. In grid mode lo
    is the grid minimum minus n*h/2 (s1 is 1-Lipschitz per coordinate).
    """
    _require(box.intervals)
    if mode not in ("conservative", "grid"):
        raise DomainError(f"unknown box mode {mode!r}; expected 'conservative' or 'grid'")
    hi = s1_box_max(box)

    if all(iv.degenerate for iv in box.intervals):
        return s1_closed([iv.lo for iv in box.intervals]), hi

    if mode == "conservative":
        if _positive_product_attainable(box):
            raise ConservativeModeInapplicable()
        lo = sum((iv.abs_range()[0] for iv in box.intervals), Fraction(0))
        return lo, hi

    h = to_fraction(spacing)
    if h <= 0:
        raise NonPositiveSpacing(spacing)
    lo = _grid_min(box, h, max_points) - len(box) * h / 2
    return lo, hi
