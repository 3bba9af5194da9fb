"""
Inclusion-type checks on effective domains and their projections.

holds <=> no element was found outside the right-hand set; worst_margin counts the
elements found outside. Grid domains are compared up to one grid cell, since the
boundary of a convex set falls between nodes. Closures in the weak-* topology are
ordinary closures here (finite dimension).
"""
import itertools
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.api.models.report_models import LemmaReport
from src.core.convex.exact import rank
from src.core.convex.extended import is_finite
from src.core.convex.functions import (
    DUAL,
    PRIMAL,
    GeneratorFn,
    GridFn,
    GridSet,
    GridSpec,
    project_domain,
    swap_blocks,
)
from src.core.convex.geometry import HPolyhedron, VPolytope, convex_hull, support_function
from src.core.fitzpatrick.constructions import (
    jdelta_pwl1d_eval,
    phi_linear_eval,
    phi_pwl1d_eval,
    phi_pwl1d_grid,
    sigma_finite,
)
from src.core.gates.gate import check_majorizes_pi
from src.core.legendre.transform import j_transform
from src.core.lemmas.inequalities import _report, _skipped, describe
from src.core.operators.models import FiniteOperator, LinearOperator, PwlCurve1d
from src.core.operators.predicates import is_maximal_1d, is_monotone, sample_graph
from src.utils.helpers import digest, ext_to_json, to_fraction, to_fraction_vector
from src.utils.logging import logger
from src.validation.error_handler import InputError, PreconditionError

PRECONDITIONS = ("jh_ge_pi", "h_ge_pi", "both")
DEFAULT_WINDOWS = (2, 4, 8)
_EPS = 1e-9


def _inclusion_report(lemma_id: str, inputs, outside: List, note: str = "") -> LemmaReport:
    return _report(lemma_id, inputs, float(len(outside)), 0.0, outside[0] if outside else None,
                   note=note, holds=not outside)


# --------------------------------------------------------------------------- #
# D(J delta_{D(h)}) inside the recession cone of D(Jh)
# --------------------------------------------------------------------------- #

def _direction_grid(dim: int, resolution: int, window: float) -> List[Tuple[Fraction, ...]]:
    spec = GridSpec.symmetric(dim, window, resolution)
    return [spec.exact_node(i) for i in np.ndindex(*spec.shape) if any(spec.exact_node(i))]


def check_recession_inclusion(h, cone_domain: Optional[Callable[[Sequence], bool]] = None,
                              window: float = 2.0, resolution: int = 5,
                              scales: Sequence[int] = (1, 2, 4, 8)) -> LemmaReport:
    """
    Directions u in D(J delta_{D(h)}) are tested as rays z0 + t u from points z0 of D(Jh).

    `h` is a GeneratorFn, or a maximal curve T standing for sigma_T (so D(h) has the support
    function of graph T and Jh = phi_T). `cone_domain` replaces the membership test of D(Jh).
    """
    if isinstance(h, GeneratorFn):
        jh = j_transform(h).function
        inside = cone_domain or (lambda z: is_finite(jh.evaluate(z)))
        polytope = VPolytope.from_points(h.points)
        # J delta_{D(h)}(z) is the support of the polytope D(h) at the swapped point
        in_jdelta = lambda u: is_finite(support_function(polytope, swap_blocks(u)))
        dim = h.dim
        bases = [tuple(Fraction(0) for _ in range(dim))]
        inputs = {"h": describe(h)}
    elif isinstance(h, PwlCurve1d):
        if not is_maximal_1d(h):
            raise PreconditionError("Curve is not maximal monotone")
        inside = cone_domain or (lambda z: is_finite(phi_pwl1d_eval(h, z)))
        in_jdelta = lambda u: is_finite(jdelta_pwl1d_eval(h, u))
        dim = 2
        bases = [z for z in _direction_grid(2, 5, window) if inside(z)]
        inputs = {"curve": repr(h)}
    else:
        raise InputError("Recession inclusion needs a generator function or a curve", type(h).__name__)

    directions = [u for u in _direction_grid(dim, resolution, window) if in_jdelta(u)]
    outside = []
    for u in directions:
        for z0 in bases:
            if not all(inside(tuple(a + t * b for a, b in zip(z0, u))) for t in scales):
                outside.append(ext_to_json([list(u), list(z0)]))
                break
    logger.debug(f"recession-inclusion: {len(directions)} directions, {len(bases)} bases, {len(outside)} outside")
    return _inclusion_report("recession-inclusion", inputs, outside,
                             note=f"{len(directions)} directions from D(J delta) tested along rays")


# --------------------------------------------------------------------------- #
# Projection inclusions between D(h) and D(Jh)
# --------------------------------------------------------------------------- #

def _dilated_hull_contains(target: np.ndarray, spacing: Sequence[float]):
    """Membership in conv(target) enlarged by one grid cell per axis."""
    dim = target.shape[1]
    if dim == 1:
        lo, hi = target[:, 0].min() - spacing[0] - _EPS, target[:, 0].max() + spacing[0] + _EPS
        return lambda p: lo <= p[0] <= hi
    hull = convex_hull([to_fraction_vector(p) for p in np.unique(target, axis=0)])
    steps = [to_fraction(s) for s in spacing]
    corners = list(itertools.product(*[(-s, Fraction(0), s) for s in steps]))
    dilated = convex_hull([tuple(a + b for a, b in zip(v, c)) for v in hull.vertices for c in corners])
    return lambda p: dilated.contains(to_fraction_vector(p))


def _trusted_projection(spec: GridSpec, trusted: np.ndarray, block: str) -> GridSet:
    axes = spec.block_axes(block)
    other = tuple(i for i in range(spec.d) if i not in axes)
    return GridSet(tuple(spec.axes[i] for i in axes), trusted.any(axis=other))


def check_projection_inclusions(h: GridFn, precondition: Optional[str], method: str = "llt",
                                tol: float = 1e-6) -> LemmaReport:
    """
    precondition "jh_ge_pi": P2 D(Jh) in conv P2 D(h) and P1 D(Jh) in conv P1 D(h).
    precondition "h_ge_pi":  P2 D(h) in P2 D(Jh) and P1 D(h) in P1 D(Jh) (closures).
    "both" runs all four. D(Jh) on a grid is the set of trusted (unsaturated) nodes.
    """
    if precondition not in PRECONDITIONS:
        raise InputError(f"Declare which inequality holds: one of {', '.join(PRECONDITIONS)}", precondition)
    h.require_proper()
    jh = j_transform(h, method=method)
    trusted = jh.trusted & jh.function.finite_mask
    spec = h.spec
    sets = {}
    for block in (PRIMAL, DUAL):
        sets[("h", block)] = project_domain(h, block).points()
        sets[("jh", block)] = _trusted_projection(spec, trusted, block).points()

    pairs = []
    if precondition in ("jh_ge_pi", "both"):
        pairs += [(("jh", DUAL), ("h", DUAL)), (("jh", PRIMAL), ("h", PRIMAL))]
    if precondition in ("h_ge_pi", "both"):
        pairs += [(("h", DUAL), ("jh", DUAL)), (("h", PRIMAL), ("jh", PRIMAL))]

    outside = []
    for left, right in pairs:
        if len(sets[left]) == 0:
            continue
        if len(sets[right]) == 0:
            outside.append({"from": "P%s D(%s)" % (1 if left[1] == PRIMAL else 2, left[0]),
                            "point": sets[left][0].tolist()})
            continue
        axes = spec.block_axes(right[1])
        contains = _dilated_hull_contains(sets[right], [spec.axes[i].spacing for i in axes])
        for p in sets[left]:
            if not contains(p):
                outside.append({"from": "P%s D(%s)" % (1 if left[1] == PRIMAL else 2, left[0]),
                                "point": p.tolist()})
                break

    h_check = check_majorizes_pi(h, tol=tol).holds
    jh_check = check_majorizes_pi(jh.function, tol=tol, mask=jh.saturation_mask).holds
    note = f"declared {precondition}; on the grid h >= pi: {h_check}, Jh >= pi: {jh_check}"
    return _inclusion_report("projection-inclusions", {"h": describe(h), "precondition": precondition},
                             outside, note=note)


# --------------------------------------------------------------------------- #
# Invariant closures of the domain projections along the family
# --------------------------------------------------------------------------- #

def _clip(interval: Tuple, window: float) -> Tuple[float, float]:
    lo, hi = interval
    return (-window if lo is None else max(float(lo), -window),
            window if hi is None else min(float(hi), window))


def _interval_of(points: np.ndarray) -> Tuple[float, float]:
    return float(points.min()), float(points.max())


def _curve_invariance(T: PwlCurve1d, window: float, resolution: int, samples: int) -> LemmaReport:
    if not is_maximal_1d(T):
        raise PreconditionError("Curve is not maximal monotone")
    spec = GridSpec.symmetric(2, window, resolution)
    step = spec.max_spacing
    expected = {PRIMAL: _clip(T.domain_interval, window), DUAL: _clip(T.range_interval, window)}

    phi = phi_pwl1d_grid(T, spec)
    region = HPolyhedron.box([(-window, window), (-window, window)])
    sigma = sigma_finite(sample_graph(T, region, samples))
    mid = GridFn(spec, 0.5 * (phi.values + sigma.sample(spec).values))

    outside, worst = [], 0.0
    for name, fn in (("phi", phi), ("sigma", sigma), ("midpoint", mid)):
        for block in (PRIMAL, DUAL):
            projected = project_domain(fn, block)
            if isinstance(projected, GridSet):
                if projected.is_empty():
                    outside.append({"h": name, "block": block, "projection": None})
                    continue
                got = _interval_of(projected.points()[:, 0])
            else:
                lo, hi = projected.bounding_box()[0]
                got = (float(lo), float(hi))
            deviation = max(abs(got[0] - expected[block][0]), abs(got[1] - expected[block][1]))
            worst = max(worst, deviation - step)
            if deviation > step + _EPS:
                outside.append({"h": name, "block": block, "projection": list(got), "expected": list(expected[block])})
    return _report("domain-invariance", {"curve": repr(T), "grid": spec.to_dict()}, len(outside), 0.0,
                   outside[0] if outside else None,
                   note=f"window projections vs conv D(T), conv R(T); largest excess over one cell {worst:.3g}",
                   holds=not outside)


def _linear_invariance(T: LinearOperator) -> LemmaReport:
    """
    phi_T is finite at (x, x*) iff M^T x + x* lies in the range of S, so P1 D(phi) = X and
    P2 D(phi) = range S + range M^T; sigma_T and the midpoint have domain graph(M).
    """
    n = T.n
    m = [list(row) for row in T.matrix]
    mt = [[m[j][i] for j in range(n)] for i in range(n)]
    s = [[(m[i][j] + m[j][i]) / 2 for j in range(n)] for i in range(n)]
    columns = lambda a: [[a[i][j] for i in range(n)] for j in range(n)]
    range_m = rank(columns(m))
    joint = rank(columns(s) + columns(mt))
    together = rank(columns(s) + columns(mt) + columns(m))
    outside = []
    if not (joint == range_m == together):
        outside.append({"block": DUAL, "rank_range_M": range_m, "rank_P2_phi": joint})
    for k in range(n):
        x = tuple(Fraction(int(i == k)) for i in range(n))
        xstar = tuple(-sum((mt[i][j] * x[j] for j in range(n)), Fraction(0)) for i in range(n))
        if not is_finite(phi_linear_eval(T, x + xstar)):
            outside.append({"block": PRIMAL, "x": ext_to_json(list(x))})
    return _report("domain-invariance", {"matrix": ext_to_json([list(r) for r in T.matrix])}, len(outside), 0.0,
                   outside[0] if outside else None, note="subspace ranks, exact", holds=not outside)


def check_domain_invariance(T, window: float = 2.0, resolution: int = 17, samples: int = 17) -> LemmaReport:
    """cl P1 D(h) = cl conv D(T) and cl P2 D(h) = cl conv R(T) for h in {phi_T, sigma_T, midpoint}."""
    if isinstance(T, FiniteOperator):
        check = is_monotone(T)
        inputs = {"pairs": ext_to_json([list(p.flat) for p in T.pairs])}
        if not check.holds:
            p, q = check.violation
            return LemmaReport(lemma_id="domain-invariance", inputs_digest=digest(inputs), holds=False,
                               worst_margin=float(-(sum((a - b) * (c - d) for a, b, c, d in
                                                        zip(p.x, q.x, p.xstar, q.xstar)))),
                               witness=ext_to_json([list(p.flat), list(q.flat)]),
                               note="operator is not monotone")
        return _skipped("domain-invariance", inputs, "finite operators are not maximal")
    if isinstance(T, PwlCurve1d):
        return _curve_invariance(T, window, resolution, samples)
    if isinstance(T, LinearOperator):
        return _linear_invariance(T)
    raise InputError("Domain invariance needs an operator", type(T).__name__)


# --------------------------------------------------------------------------- #
# Domain / range duality on nested windows
# --------------------------------------------------------------------------- #

def _reach(values: Sequence[float]) -> bool:
    """Strictly increasing across the nested windows."""
    return all(b > a + _EPS for a, b in zip(values, values[1:]))


def check_range_domain_duality(T, windows: Sequence[float] = DEFAULT_WINDOWS, samples: int = 33,
                               assume_maximal: bool = False) -> LemmaReport:
    """
    Directions where the support function of D(T) is finite must be recession directions of
    conv R(T), and symmetrically with D and R exchanged. Recession directions are those in
    which the sampled reach grows strictly across the nested windows. For bounded D(T) the
    reach of conv R(T) must grow without bound (density of conv R(T)).
    """
    lemma_id = "range-domain-duality"
    if isinstance(T, LinearOperator):
        # D(T) = X: the support of D(T) is finite only at 0; recession cone of conv D(T) is X
        inputs = {"matrix": ext_to_json([list(r) for r in T.matrix])}
        return _report(lemma_id, inputs, 0.0, 0.0, note="D(T) = X; both inclusions hold for subspace graphs")
    if isinstance(T, FiniteOperator):
        inputs = {"pairs": ext_to_json([list(p.flat) for p in T.pairs])}
        if not assume_maximal:
            return _skipped(lemma_id, inputs, "finite operators are not maximal")
        domain_box = [(min(p[i] for p in T.domain_points), max(p[i] for p in T.domain_points)) for i in range(T.n)]
        range_box = [(min(p[i] for p in T.range_points), max(p[i] for p in T.range_points)) for i in range(T.n)]
        sampled = {r: T for r in windows}
    elif isinstance(T, PwlCurve1d):
        inputs = {"curve": repr(T)}
        if not assume_maximal and not is_maximal_1d(T):
            raise PreconditionError("Curve is not maximal monotone")
        domain_box = [T.domain_interval]
        range_box = [T.range_interval]
        sampled = {}
        for r in windows:
            region = HPolyhedron.box([(-r, r), (-r, r)])
            sampled[r] = sample_graph(T, region, samples)
    else:
        raise InputError("Domain/range duality needs an operator", type(T).__name__)

    n = len(domain_box)
    directions = []
    for axis in range(n):
        for sign in (1, -1):
            directions.append((axis, sign))

    def reach(points_of, axis, sign):
        return [max(float(sign * p[axis]) for p in points_of(sampled[r])) for r in windows]

    outside = []
    for support_box, recession_points, label in ((domain_box, lambda S: S.range_points, "R"),
                                                 (range_box, lambda S: S.domain_points, "D")):
        for axis, sign in directions:
            bound = support_box[axis][1] if sign > 0 else support_box[axis][0]
            if bound is None:
                continue
            values = reach(recession_points, axis, sign)
            if not _reach(values):
                outside.append({"direction": [axis, sign], "into": f"0+ conv {label}(T)", "reach": values})

    note = "recession directions estimated on windows " + ", ".join(str(r) for r in windows)
    if all(lo is not None and hi is not None for lo, hi in domain_box):
        norms = [max(float(sum(v * v for v in p)) ** 0.5 for p in sampled[r].range_points) for r in windows]
        dense = _reach(norms)
        note += f"; bounded D(T): reach of conv R(T) {norms} grows: {dense}"
        if not dense:
            outside.append({"density": norms})
    return _inclusion_report(lemma_id, inputs, outside, note=note)
