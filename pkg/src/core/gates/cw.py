"""
Bounded-range pipeline: gate, extraction, then the range bound and full-domain checks.

`build_cw_h` instantiates the classical bounded-range construction on Z = R, so the
representation lives on X x X* = (Z x Z*) x (Z* x Z**) = R^4 and its equality set is
the rotation (x, x*) -> (-x*, x) on the unit ball.
"""
from typing import Callable, Optional

import numpy as np

from src.api.models.report_models import PipelineReport
from src.core.convex.functions import DUAL, GridFn, GridSpec, project_domain
from src.core.gates.gate import extract_operator, hausdorff_inf, run_gate
from src.utils.logging import logger
from src.validation.error_handler import AssertionViolation, InputError, PreconditionError

PrimalPredicate = Callable[[np.ndarray], np.ndarray]

MIN_CW_RESOLUTION = 9
_DISC_SLACK = 1e-12
_RANGE_SLACK = 1e-9


def build_cw_h(spec: Optional[GridSpec] = None, window: float = 2.0, resolution: int = 17) -> GridFn:
    """
    h((x, x*), (y*, y**)) = ||(x - y**, x* + y*)|| + indicator of (y*)^2 + (y**)^2 <= 1
    """
    spec = spec or GridSpec.symmetric(4, window, resolution)
    if spec.d != 4 or not spec.is_swappable():
        raise InputError("The bounded-range instance needs a swappable grid over R^4", spec.d)

    def h(x, xs, ys, yss):
        inside = ys ** 2 + yss ** 2 <= 1.0 + _DISC_SLACK
        return np.where(inside, np.hypot(x - yss, xs + ys), np.inf)

    return GridFn.from_callable(spec, h)


def unit_ball(points: np.ndarray) -> np.ndarray:
    return (points ** 2).sum(axis=1) <= 1.0 + _DISC_SLACK


def rotation_reference(spec: GridSpec) -> np.ndarray:
    """Rotation graph {(p, (-p_2, p_1))} at the primal nodes of the unit ball."""
    primal = GridSpec(spec.axes[:spec.n]).nodes()
    primal = primal[unit_ball(primal)]
    return np.hstack([primal, np.stack([-primal[:, 1], primal[:, 0]], axis=1)])


def _primal_keys(spec: GridSpec, points: np.ndarray) -> np.ndarray:
    axes = spec.axes[:spec.n]
    lo = np.array([a.lo for a in axes])
    step = np.array([a.spacing for a in axes])
    return np.rint((points - lo) / step).astype(np.int64)


def main_pipeline(h: GridFn, coverage: Optional[PrimalPredicate] = None, reference: Optional[np.ndarray] = None,
                  tol: Optional[float] = None, gate_tol: float = 1e-6, method: str = "llt",
                  declared_domain: str = "full window box",
                  hausdorff_limit: Optional[float] = None) -> PipelineReport:
    """
    Gate -> extraction -> assertions: extracted range inside the P2 bound, every primal
    fiber selected by `coverage` carries an extracted node, extracted graph monotone.

    Raises:
        PreconditionError: P2 D(h) reaches the window boundary (not bounded on the grid)
        AssertionViolation: the representability gate fails (carries its witness)
    """
    h.require_proper()
    spec = h.spec
    n = spec.n
    projected = project_domain(h, DUAL)
    if projected.touches_window():
        raise PreconditionError("P2 D(h) is not bounded inside the window; the pipeline needs a bounded projection",
                                projected.bounds())
    bound = projected.max_norm()

    gate = run_gate(h, gate_tol, method, declared_domain)
    report, _ = gate
    if not report.holds:
        raise AssertionViolation("Representability gate failed",
                                 report.h_ge_pi.witness or report.jh_ge_pi.witness)
    extraction = extract_operator(h, tol=tol, gate=gate)
    graph = np.asarray(extraction.graph, dtype=float).reshape(-1, 2 * n)

    range_norms = np.sqrt((graph[:, n:] ** 2).sum(axis=1)) if len(graph) else np.zeros(0)
    inside = bool((range_norms <= bound + _RANGE_SLACK).all())

    fibers = GridSpec(spec.axes[:n]).nodes()
    if coverage is not None:
        fibers = fibers[coverage(fibers)]
    covered_keys = {tuple(k) for k in _primal_keys(spec, graph[:, :n])}
    fiber_keys = _primal_keys(spec, fibers)
    missing = [i for i, key in enumerate(fiber_keys) if tuple(key) not in covered_keys]

    distance = None
    if reference is not None:
        in_region = graph if coverage is None else graph[coverage(graph[:, :n])]
        distance = hausdorff_inf(in_region, np.asarray(reference, dtype=float))
    within = distance is None or hausdorff_limit is None or distance <= hausdorff_limit

    holds = inside and not missing and extraction.monotone and within
    logger.info(f"Pipeline: L={bound:.6g}, range inside={inside}, fibers {len(fibers) - len(missing)}/{len(fibers)}, "
                f"monotone={extraction.monotone}, hausdorff={distance}")
    return PipelineReport(
        gate=report,
        extraction=extraction,
        range_bound=bound,
        range_inside_bound=inside,
        fibers_required=len(fibers),
        fibers_covered=len(fibers) - len(missing),
        uncovered_fiber=fibers[missing[0]].tolist() if missing else None,
        monotone=extraction.monotone,
        hausdorff_to_reference=distance,
        hausdorff_limit=hausdorff_limit,
        window_limited=True,
        holds=holds,
        note="conclusions are limited to the sampling window; P2 D(Jh) is bounded by the same L",
    )


def cw_pipeline(resolution: int = 17, window: float = 2.0, tol: Optional[float] = None,
                gate_tol: float = 1e-6, method: str = "llt") -> PipelineReport:
    """
    The bounded-range instance end to end; the extracted graph is compared with the rotation on
    the unit ball and must stay within two grid cells of it.
    """
    if resolution < MIN_CW_RESOLUTION:
        raise PreconditionError(f"Resolution below {MIN_CW_RESOLUTION} nodes per axis leaves the extraction vacuous",
                                resolution)
    h = build_cw_h(window=window, resolution=resolution)
    logger.info(f"Bounded-range instance on {h.spec.shape} nodes, window {window}")
    return main_pipeline(h, coverage=unit_ball, reference=rotation_reference(h.spec), tol=tol,
                         gate_tol=gate_tol, method=method, declared_domain="P1 D(h) = X (full window box)",
                         hausdorff_limit=2 * h.spec.max_spacing)
