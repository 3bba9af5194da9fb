"""
Monotone operator representations: finite sample sets, exact 1-D piecewise-linear
curves, and linear maps.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.convex.functions import PrimalDualPoint
from src.utils.helpers import to_fraction, to_fraction_vector
from src.validation.error_handler import InputError

Bound = Optional[Fraction]


@dataclass(frozen=True)
class FiniteOperator:
    """A finite relation T in X x X*; D(T) and R(T) are its two projections."""
    pairs: Tuple[PrimalDualPoint, ...]

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise InputError("Finite operator contains duplicate pairs")
        if len({p.n for p in self.pairs}) > 1:
            raise InputError("Finite operator mixes dimensions")

    @classmethod
    def of(cls, pairs: Iterable[Tuple[Sequence, Sequence]]) -> "FiniteOperator":
        """Build from (y, y*) pairs; scalars are accepted for n = 1; repeats are dropped."""
        points = []
        for y, ystar in pairs:
            y = [y] if not isinstance(y, (list, tuple)) else y
            ystar = [ystar] if not isinstance(ystar, (list, tuple)) else ystar
            points.append(PrimalDualPoint.of(y, ystar))
        return cls(tuple(dict.fromkeys(points)))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def n(self) -> int:
        if not self.pairs:
            raise InputError("Empty operator has no dimension")
        return self.pairs[0].n

    @property
    def domain_points(self) -> List[Tuple[Fraction, ...]]:
        return sorted({p.x for p in self.pairs})

    @property
    def range_points(self) -> List[Tuple[Fraction, ...]]:
        return sorted({p.xstar for p in self.pairs})

    def as_array(self) -> np.ndarray:
        """(K, 2n) float array of the flattened pairs."""
        return np.array([[float(v) for v in p.flat] for p in self.pairs], dtype=float)


@dataclass(frozen=True)
class SlopedPiece:
    """y* = a y + b for y in [lo, hi] (None = unbounded), a >= 0."""
    lo: Bound
    hi: Bound
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.a < 0:
            raise InputError("Sloped segment must be nondecreasing", self.a)
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise InputError("Sloped segment needs lo < hi", (self.lo, self.hi))

    @classmethod
    def of(cls, lo, hi, a, b) -> "SlopedPiece":
        return cls(None if lo is None else to_fraction(lo), None if hi is None else to_fraction(hi),
                   to_fraction(a), to_fraction(b))

    def start(self) -> Optional[Tuple[Fraction, Fraction]]:
        return None if self.lo is None else (self.lo, self.a * self.lo + self.b)

    def end(self) -> Optional[Tuple[Fraction, Fraction]]:
        return None if self.hi is None else (self.hi, self.a * self.hi + self.b)

    def contains(self, y: Fraction, ystar: Fraction) -> bool:
        inside = (self.lo is None or y >= self.lo) and (self.hi is None or y <= self.hi)
        return inside and ystar == self.a * y + self.b


@dataclass(frozen=True)
class VerticalPiece:
    """y = v, y* in [lo, hi] (None = unbounded)."""
    v: Fraction
    lo: Bound
    hi: Bound

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise InputError("Vertical segment needs lo < hi", (self.lo, self.hi))

    @classmethod
    def of(cls, v, lo, hi) -> "VerticalPiece":
        return cls(to_fraction(v), None if lo is None else to_fraction(lo), None if hi is None else to_fraction(hi))

    def start(self) -> Optional[Tuple[Fraction, Fraction]]:
        return None if self.lo is None else (self.v, self.lo)

    def end(self) -> Optional[Tuple[Fraction, Fraction]]:
        return None if self.hi is None else (self.v, self.hi)

    def contains(self, y: Fraction, ystar: Fraction) -> bool:
        return y == self.v and (self.lo is None or ystar >= self.lo) and (self.hi is None or ystar <= self.hi)


Segment = Union[SlopedPiece, VerticalPiece]


@dataclass(frozen=True)
class PwlCurve1d:
    """
    Connected nondecreasing curve in R x R traced segment by segment.

    Consecutive segments share an endpoint; only the first segment may start at
    infinity and only the last may end there.
    """
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise InputError("Curve needs at least one segment")
        for i, segment in enumerate(self.segments):
            if i > 0 and segment.start() is None:
                raise InputError("Only the first segment may be unbounded below", i)
            if i < len(self.segments) - 1 and segment.end() is None:
                raise InputError("Only the last segment may be unbounded above", i)
            if i > 0 and self.segments[i - 1].end() != segment.start():
                raise InputError("Consecutive segments must share an endpoint",
                                 (i - 1, self.segments[i - 1].end(), segment.start()))

    @property
    def n(self) -> int:
        return 1

    def contains(self, y, ystar) -> bool:
        y, ystar = to_fraction(y), to_fraction(ystar)
        return any(s.contains(y, ystar) for s in self.segments)

    @cached_property
    def domain_interval(self) -> Tuple[Bound, Bound]:
        """Closed hull of D(T); None marks an unbounded end."""
        return _hull_of_coordinate(self.segments, 0)

    @cached_property
    def range_interval(self) -> Tuple[Bound, Bound]:
        return _hull_of_coordinate(self.segments, 1)


def _ray_limit(segment: Segment, coordinate: int) -> Bound:
    """Coordinate value along an unbounded ray, None when the ray escapes in it."""
    if isinstance(segment, VerticalPiece):
        return segment.v if coordinate == 0 else None
    if coordinate == 1 and segment.a == 0:
        return segment.b
    return None


def _hull_of_coordinate(segments: Sequence[Segment], coordinate: int) -> Tuple[Bound, Bound]:
    # both coordinates are nondecreasing along the curve
    first, last = segments[0], segments[-1]
    start, end = first.start(), last.end()
    lo = start[coordinate] if start is not None else _ray_limit(first, coordinate)
    hi = end[coordinate] if end is not None else _ray_limit(last, coordinate)
    return lo, hi


@dataclass(frozen=True)
class LinearOperator:
    """Graph {(x, Mx)} of a square matrix."""
    matrix: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        size = len(self.matrix)
        if size not in (1, 2) or any(len(row) != size for row in self.matrix):
            raise InputError("Linear operator needs a square 1x1 or 2x2 matrix", [len(r) for r in self.matrix])

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "LinearOperator":
        return cls(tuple(to_fraction_vector(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.matrix)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix], dtype=float)

    def apply(self, x: Sequence) -> Tuple[Fraction, ...]:
        x = to_fraction_vector(x)
        return tuple(sum((m * v for m, v in zip(row, x)), Fraction(0)) for row in self.matrix)


Operator = Union[FiniteOperator, PwlCurve1d, LinearOperator]


# --------------------------------------------------------------------------- #
# Named curves and maps
# --------------------------------------------------------------------------- #

def identity_curve() -> PwlCurve1d:
    return PwlCurve1d((SlopedPiece.of(None, None, 1, 0),))


def sign_curve() -> PwlCurve1d:
    """Subdifferential of |y|."""
    return PwlCurve1d((
        SlopedPiece.of(None, 0, 0, -1),
        VerticalPiece.of(0, -1, 1),
        SlopedPiece.of(0, None, 0, 1),
    ))


def interval_normal_cone(lo=-1, hi=1) -> PwlCurve1d:
    """Subdifferential of the indicator of [lo, hi]."""
    return PwlCurve1d((
        VerticalPiece.of(lo, None, 0),
        SlopedPiece.of(lo, hi, 0, 0),
        VerticalPiece.of(hi, 0, None),
    ))


def point_normal_cone(v=0) -> PwlCurve1d:
    """Subdifferential of the indicator of {v}: the vertical line y = v."""
    return PwlCurve1d((VerticalPiece.of(v, None, None),))


def huber_derivative(width=1) -> PwlCurve1d:
    """Derivative of the Huber function: clipped identity, bounded range."""
    return PwlCurve1d((
        SlopedPiece.of(None, -width, 0, -width),
        SlopedPiece.of(-width, width, 1, 0),
        SlopedPiece.of(width, None, 0, width),
    ))


def rotation_operator() -> LinearOperator:
    """(x, x*) -> (-x*, x)."""
    return LinearOperator.of([[0, -1], [1, 0]])
