"""
Bounded range / bounded domain characterisations.

If R(T) lies in the ball B[L], every h in the Fitzpatrick family of T has slices
x -> h(x, x*) (x* in P2 D(h)) that are real valued and L-Lipschitz. The mirror statement
exchanges the blocks: a bounded domain gives L-Lipschitz slices x* -> h(x, x*).

Exact inputs are compared in rationals (A-form slope vectors, squared norms); grids by
finite differences along the slice axes.
"""
import math
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from src.api.models.report_models import BoundednessReport
from src.core.convex.functions import DUAL, PRIMAL, GeneratorFn, GridFn, GridSpec, MaxAffineFn, project_domain
from src.core.convex.geometry import NormBall
from src.core.fitzpatrick.constructions import phi_finite, phi_pwl1d_grid
from src.core.legendre.transform import conjugate_exact
from src.core.operators.models import FiniteOperator, LinearOperator, PwlCurve1d
from src.utils.logging import logger
from src.validation.error_handler import InputError

Subject = Union[FiniteOperator, PwlCurve1d, LinearOperator, GridFn, MaxAffineFn, GeneratorFn]

RANGE = "range"
DOMAIN = "domain"

# which block the bound is taken over, and which block the slices vary in
_BLOCKS = {RANGE: (DUAL, PRIMAL), DOMAIN: (PRIMAL, DUAL)}

UNBOUNDED_NOTE = "projection is unbounded; the Lipschitz equivalence does not apply and no claim is made"
# the mirror statement is also stated with slices indexed by x* in P2 D(h); x in P1 D(h) is used here
DOMAIN_INDEX_NOTE = "slices x* -> h(x, x*) indexed by x in P1 D(h), not by x* in P2 D(h)"


def _sqrt(value: Fraction) -> float:
    return math.sqrt(float(value))


def _max_norm_sq(points) -> Fraction:
    return max((sum(v * v for v in p) for p in points), default=Fraction(0))


def grid_slice_lipschitz(h: GridFn, slice_block: str) -> Tuple[float, bool]:
    """
    Largest |difference| / spacing along the axes of `slice_block`, over slices whose
    fixed coordinates carry at least one finite value.

    Returns:
        (estimate, every such slice is finite at all its nodes)
    """
    spec = h.spec
    vary = spec.block_axes(slice_block)
    fixed = tuple(i for i in range(spec.d) if i not in vary)
    finite = h.finite_mask
    occupied = finite.any(axis=vary, keepdims=True)
    real_valued = bool(finite[np.broadcast_to(occupied, spec.shape)].all())
    estimate = 0.0
    for axis in vary:
        if spec.axes[axis].m < 2:
            continue
        diffs = np.diff(h.values, axis=axis)
        keep = np.isfinite(diffs) & np.take(np.broadcast_to(occupied, spec.shape), range(1, spec.shape[axis]), axis=axis)
        if keep.any():
            estimate = max(estimate, float(np.abs(diffs[keep]).max()) / spec.axes[axis].spacing)
    logger.debug(f"slice Lipschitz over {slice_block} axes {vary} (fixed {fixed}): {estimate}")
    return estimate, real_valued


def _finite_report(T: FiniteOperator, kind: str) -> BoundednessReport:
    points = T.range_points if kind == RANGE else T.domain_points
    bound_sq = _max_norm_sq(points)
    slope_sq = phi_finite(T).block_slope_norm_sq(_BLOCKS[kind][1])
    return BoundednessReport(block=kind, bounded=True, bound=_sqrt(bound_sq),
                             lipschitz_estimate=_sqrt(slope_sq), holds=slope_sq <= bound_sq,
                             note="exact A-form slope bound")


def _curve_report(T: PwlCurve1d, kind: str, window: float, resolution: int, tol: float) -> BoundednessReport:
    lo, hi = T.range_interval if kind == RANGE else T.domain_interval
    if lo is None or hi is None:
        return BoundednessReport(block=kind, bounded=False, holds=True, note=UNBOUNDED_NOTE)
    bound = float(max(abs(lo), abs(hi)))
    phi = phi_pwl1d_grid(T, GridSpec.symmetric(2, window, resolution))
    estimate, real_valued = grid_slice_lipschitz(phi, _BLOCKS[kind][1])
    return BoundednessReport(block=kind, bounded=True, bound=bound, window_limited=True,
                             lipschitz_estimate=estimate, holds=real_valued and estimate <= bound + tol,
                             note="" if real_valued else "a slice over the bounded projection is not real valued")


def _linear_report(T: LinearOperator, kind: str) -> BoundednessReport:
    zero = all(v == 0 for row in T.matrix for v in row)
    if kind == DOMAIN or not zero:
        return BoundednessReport(block=kind, bounded=False, holds=True, note=UNBOUNDED_NOTE)
    # M = 0: phi is the indicator of x* = 0, constant on its slices
    return BoundednessReport(block=kind, bounded=True, bound=0.0, lipschitz_estimate=0.0, holds=True)


def _grid_report(h: GridFn, kind: str, tol: float) -> BoundednessReport:
    projected = project_domain(h, _BLOCKS[kind][0])
    if projected.touches_window():
        return BoundednessReport(block=kind, bounded=False, window_limited=True, holds=True,
                                 note=f"{UNBOUNDED_NOTE} (projection reaches the window boundary)")
    bound = projected.max_norm()
    estimate, real_valued = grid_slice_lipschitz(h, _BLOCKS[kind][1])
    return BoundednessReport(block=kind, bounded=True, bound=bound, window_limited=True,
                             lipschitz_estimate=estimate, holds=real_valued and estimate <= bound + tol,
                             note="" if real_valued else "a slice over the bounded projection is not real valued")


def _max_affine_report(h: MaxAffineFn, kind: str) -> BoundednessReport:
    projection_block, slice_block = _BLOCKS[kind]
    slope_sq = h.block_slope_norm_sq(slice_block)
    projected = project_domain(h, projection_block)
    box = projected.bounding_box()
    if any(lo is None or hi is None for lo, hi in box):
        return BoundednessReport(block=kind, bounded=False, lipschitz_estimate=_sqrt(slope_sq), holds=True,
                                 note=f"{UNBOUNDED_NOTE}; pass the operator itself to obtain L")
    if isinstance(projected, NormBall):
        bound = _sqrt(sum(c * c for c in projected.center)) + float(projected.radius)
        return BoundednessReport(block=kind, bounded=True, bound=bound, lipschitz_estimate=_sqrt(slope_sq),
                                 holds=_sqrt(slope_sq) <= bound)
    bound_sq = _max_norm_sq(projected.vertices) if hasattr(projected, "vertices") else \
        sum(max(lo * lo, hi * hi) for lo, hi in box)
    return BoundednessReport(block=kind, bounded=True, bound=_sqrt(bound_sq), lipschitz_estimate=_sqrt(slope_sq),
                             holds=slope_sq <= bound_sq)


def _generator_report(h: GeneratorFn, kind: str) -> BoundednessReport:
    """The bound controls the conjugate: h* has slope vectors equal to the generator points."""
    projection_block, _ = _BLOCKS[kind]
    bound_sq = _max_norm_sq(project_domain(h, projection_block).vertices)
    slope_sq = conjugate_exact(h).block_slope_norm_sq(projection_block)
    return BoundednessReport(block=kind, bounded=True, bound=_sqrt(bound_sq), lipschitz_estimate=_sqrt(slope_sq),
                             holds=slope_sq <= bound_sq,
                             note="slices of the conjugate h*; exact slope bound")


def _report(subject: Subject, kind: str, window: float, resolution: int, tol: float) -> BoundednessReport:
    if isinstance(subject, FiniteOperator):
        report = _finite_report(subject, kind)
    elif isinstance(subject, PwlCurve1d):
        report = _curve_report(subject, kind, window, resolution, tol)
    elif isinstance(subject, LinearOperator):
        report = _linear_report(subject, kind)
    elif isinstance(subject, GridFn):
        subject.require_proper()
        report = _grid_report(subject, kind, tol)
    elif isinstance(subject, MaxAffineFn):
        report = _max_affine_report(subject, kind)
    elif isinstance(subject, GeneratorFn):
        report = _generator_report(subject, kind)
    else:
        raise InputError("Boundedness report needs an operator or a function", type(subject).__name__)
    if kind == DOMAIN:
        report = report.model_copy(update={"note": "; ".join(filter(None, (report.note, DOMAIN_INDEX_NOTE)))})
    logger.info(f"bounded_{kind}_report: bounded={report.bounded}, L={report.bound}, "
                f"estimate={report.lipschitz_estimate}, holds={report.holds}")
    return report


def bounded_range_report(subject: Subject, window: float = 2.0, resolution: int = 33,
                         tol: float = 1e-9) -> BoundednessReport:
    """L = sup of the norm over P2 D(h) (or R(T)); slices x -> h(x, x*) must be L-Lipschitz."""
    return _report(subject, RANGE, window, resolution, tol)


def bounded_domain_report(subject: Subject, window: float = 2.0, resolution: int = 33,
                          tol: float = 1e-9) -> BoundednessReport:
    """
    Mirror of bounded_range_report: L over P1 D(h) (or D(T)), slices x* -> h(x, x*).

    The slice family is indexed by x in P1 D(h); vacuous strong x weak-* closedness
    side conditions are not tested in finite dimension.
    """
    return _report(subject, DOMAIN, window, resolution, tol)
