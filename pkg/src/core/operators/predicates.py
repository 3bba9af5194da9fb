"""
Graph-level predicates and deterministic graph sampling.
"""
from fractions import Fraction
from itertools import product
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.core.convex.functions import PrimalDualPoint
from src.core.convex.geometry import Region
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    PwlCurve1d,
    SlopedPiece,
    VerticalPiece,
)
from src.utils.helpers import dot
from src.utils.logging import logger
from src.validation.error_handler import InputError

MONOTONE_EIG_TOL = 1e-12


class MonotoneCheck(NamedTuple):
    holds: bool
    violation: Optional[Tuple[PrimalDualPoint, PrimalDualPoint]] = None


def monotone_gap(p: PrimalDualPoint, q: PrimalDualPoint) -> Fraction:
    """<x - y, x* - y*>"""
    return dot([a - b for a, b in zip(p.x, q.x)], [a - b for a, b in zip(p.xstar, q.xstar)])


def is_monotone(T: FiniteOperator) -> MonotoneCheck:
    """Exact pairwise test; the violation is the first offending pair in index order."""
    pairs = T.pairs
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            if monotone_gap(pairs[i], pairs[j]) < 0:
                return MonotoneCheck(False, (pairs[i], pairs[j]))
    return MonotoneCheck(True)


def monotone_violations_array(points: np.ndarray, tol: float = 0.0) -> Optional[Tuple[int, int, float]]:
    """
    Float pairwise test on an (K, 2n) array.

    Returns:
        (i, j, gap) of the worst pair with gap < -tol, or None
    """
    if len(points) < 2:
        return None
    half = points.shape[1] // 2
    x, xs = points[:, :half], points[:, half:]
    gaps = np.einsum('ikn,ikn->ik', x[:, None, :] - x[None, :, :], xs[:, None, :] - xs[None, :, :])
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    worst = float(gaps[i, j])
    if worst < -tol:
        return int(min(i, j)), int(max(i, j)), worst
    return None


def is_maximal_1d(T: PwlCurve1d) -> bool:
    """Connected nondecreasing curve escaping to infinity at both ends."""
    if not isinstance(T, PwlCurve1d):
        raise InputError("Maximality is decided for piecewise-linear curves only", type(T).__name__)
    return T.segments[0].start() is None and T.segments[-1].end() is None


def linear_is_monotone(M) -> bool:
    """True iff the symmetric part of M has no eigenvalue below -1e-12."""
    matrix = M.array if isinstance(M, LinearOperator) else np.asarray(M, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError("Monotonicity of a linear map needs a square matrix", matrix.shape)
    symmetric = 0.5 * (matrix + matrix.T)
    return bool(np.linalg.eigvalsh(symmetric).min() >= -MONOTONE_EIG_TOL)


def _equispaced(lo: Fraction, hi: Fraction, count: int) -> List[Fraction]:
    if count == 1 or lo == hi:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _bounded_box(region: Region) -> List[Tuple[Fraction, Fraction]]:
    box = region.bounding_box()
    if any(lo is None or hi is None for lo, hi in box):
        raise InputError("Sampling region must be bounded", box)
    return box


def _sample_curve(T: PwlCurve1d, region: Region, count: int, vertical_count: int) -> List[PrimalDualPoint]:
    """
    A region over y alone bounds only the y coordinate: vertical pieces are then sampled
    over their own y* extent, which must be bounded.
    """
    box = _bounded_box(region)
    if region.dim not in (1, 2):
        raise InputError("Curve sampling region must live in y or (y, y*)", region.dim)
    y_lo, y_hi = box[0]
    ys_lo, ys_hi = box[1] if region.dim == 2 else (None, None)

    def inside(y: Fraction, ystar: Fraction) -> bool:
        return region.contains((y, ystar) if region.dim == 2 else (y,))

    samples = []
    for y in _equispaced(y_lo, y_hi, count):
        for segment in T.segments:
            if isinstance(segment, SlopedPiece) and segment.contains(y, segment.a * y + segment.b):
                samples.append((y, segment.a * y + segment.b))
    for segment in T.segments:
        if isinstance(segment, VerticalPiece) and y_lo <= segment.v <= y_hi:
            lo = _tighter(segment.lo, ys_lo, max)
            hi = _tighter(segment.hi, ys_hi, min)
            if lo is None or hi is None:
                raise InputError("Vertical piece is unbounded in y*; give a region over (y, y*)", segment.v)
            if lo <= hi:
                samples.extend((segment.v, ystar) for ystar in _equispaced(lo, hi, vertical_count))
    kept = sorted({s for s in samples if inside(*s)})
    return [PrimalDualPoint((y,), (ystar,)) for y, ystar in kept]


def _tighter(bound: Optional[Fraction], limit: Optional[Fraction], pick) -> Optional[Fraction]:
    if bound is None:
        return limit
    return bound if limit is None else pick(bound, limit)


def _sample_linear(T: LinearOperator, region: Region, count: int) -> List[PrimalDualPoint]:
    n = T.n
    if region.dim not in (n, 2 * n):
        raise InputError("Linear sampling region must live in X or X x X*", region.dim)
    box = _bounded_box(region)[:n]
    samples = []
    for x in product(*(_equispaced(lo, hi, count) for lo, hi in box)):
        image = T.apply(x)
        point = x if region.dim == n else tuple(x) + image
        if region.contains(point):
            samples.append(PrimalDualPoint(tuple(x), image))
    return samples


def sample_graph(T, region: Region, count: int, vertical_count: Optional[int] = None) -> FiniteOperator:
    """
    Deterministic equispaced samples of graph(T) inside a bounded region.

    Curves take a region over y or (y, y*); vertical segments are sampled in y* with
    `vertical_count` nodes (default: count). Linear maps take a region over x or (x, x*).
    """
    if count < 1:
        raise InputError("Sample count must be at least 1", count)
    if isinstance(T, PwlCurve1d):
        points = _sample_curve(T, region, count, vertical_count or count)
    elif isinstance(T, LinearOperator):
        points = _sample_linear(T, region, count)
    else:
        raise InputError("Graph sampling needs a curve or a linear operator", type(T).__name__)
    if not points:
        raise InputError("The graph does not meet the sampling region")
    logger.debug(f"sample_graph: {len(points)} samples of {type(T).__name__}")
    return FiniteOperator(tuple(dict.fromkeys(points)))
