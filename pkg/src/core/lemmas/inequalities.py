"""
Inequality-type checks. Each returns a LemmaReport with

    holds  <=>  worst_margin <= tol

where worst_margin is the largest amount by which the right-hand side exceeds the left.
"""
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from src.api.models.report_models import LemmaReport
from src.core.convex.extended import is_finite, to_float
from src.core.convex.functions import DUAL, PRIMAL, GeneratorFn, GridFn, GridSpec, MaxAffineFn, pairing, project_domain
from src.core.convex.geometry import VPolytope, support_function
from src.core.fitzpatrick.constructions import jdelta_pwl1d_eval
from src.core.legendre.transform import ConjugateResult, conjugate_at, conjugate_exact, conjugate_grid
from src.core.operators.models import PwlCurve1d
from src.core.operators.predicates import is_maximal_1d
from src.utils.helpers import digest, dot, ext_to_json, to_fraction, to_fraction_vector
from src.utils.logging import logger
from src.validation.error_handler import InputError, PreconditionError

ShiftSample = Tuple[Sequence, Sequence, object]


def _report(lemma_id: str, inputs, worst: float, tol: float, witness=None, note: str = "",
            holds: Optional[bool] = None) -> LemmaReport:
    holds = worst <= tol if holds is None else holds
    return LemmaReport(lemma_id=lemma_id, inputs_digest=digest(inputs), holds=holds, worst_margin=float(worst),
                       witness=None if holds else witness, note=note)


def _skipped(lemma_id: str, inputs, note: str) -> LemmaReport:
    return LemmaReport(lemma_id=lemma_id, inputs_digest=digest(inputs), holds=True, worst_margin=0.0,
                       note=note, skipped=True)


def describe(f) -> object:
    """Digest payload for a function or operator."""
    if isinstance(f, GridFn):
        return {"grid": f.spec.to_dict(), "values": f.values.ravel().tolist()}
    if isinstance(f, MaxAffineFn):
        return {"pieces": [[list(p.slope), p.offset] for p in f.pieces]}
    if isinstance(f, GeneratorFn):
        return {"generators": [[list(p), v] for p, v in f.generators]}
    return repr(f)


# --------------------------------------------------------------------------- #
# f*(z*) + lambda * support_{D(f)}(w*) >= f*(z* + lambda w*)
# --------------------------------------------------------------------------- #

def check_conjugate_shift(f: Union[GridFn, GeneratorFn], samples: Sequence[ShiftSample], tol: float = 1e-9,
                          support: Optional[Callable[[Sequence], object]] = None) -> LemmaReport:
    """
    Args:
        f: proper closed convex function (grid or generator form)
        samples: (z*, w*, lambda) triples with lambda >= 0
        support: override for the support function of D(f); the default is computed from f
    """
    inputs = {"f": describe(f), "samples": [[list(map(str, z)), list(map(str, w)), str(l)] for z, w, l in samples]}
    worst, witness = float("-inf"), None
    if isinstance(f, GeneratorFn):
        conjugate = conjugate_exact(f)
        domain = VPolytope.from_points(f.points)
        support = support or (lambda w: support_function(domain, w))
        for zs, ws, lam in samples:
            zs, ws, lam = to_fraction_vector(zs), to_fraction_vector(ws), to_fraction(lam)
            if lam < 0:
                raise InputError("Shift scale must be nonnegative", lam)
            shifted = tuple(a + lam * b for a, b in zip(zs, ws))
            margin = conjugate.evaluate(shifted) - conjugate.evaluate(zs) - lam * support(ws)
            if margin > worst:
                worst, witness = margin, ext_to_json([list(zs), list(ws), lam])
        worst = float(worst)
    elif isinstance(f, GridFn):
        nodes = f.spec.nodes()[f.finite_mask.ravel()]
        support = support or (lambda w: float(np.max(nodes @ np.asarray(w, dtype=float))))
        for zs, ws, lam in samples:
            zs, ws, lam = np.asarray(zs, dtype=float), np.asarray(ws, dtype=float), float(lam)
            if lam < 0:
                raise InputError("Shift scale must be nonnegative", lam)
            values = conjugate_at(f, np.vstack([zs, zs + lam * ws]))
            margin = float(values[1] - values[0] - lam * to_float(support(ws)))
            if margin > worst:
                worst, witness = margin, [zs.tolist(), ws.tolist(), lam]
    else:
        raise InputError("Conjugate shift check needs a grid or generator function", type(f).__name__)
    logger.debug(f"conjugate-shift: {len(samples)} samples, worst {worst}")
    return _report("conjugate-shift", inputs, worst if samples else 0.0, tol, witness)


# --------------------------------------------------------------------------- #
# Fenchel-Young and order reversal
# --------------------------------------------------------------------------- #

def fenchel_young_check(f, conjugate: Optional[Union[ConjugateResult, GridFn, MaxAffineFn]] = None,
                        probes: Optional[Sequence[Tuple[Sequence, Sequence]]] = None,
                        tol: float = 1e-9) -> LemmaReport:
    """
    f(z) + f*(s) >= s.z. Grids: every pair of finite nodes (z, s), f* on its own grid.
    Exact forms: the listed (z, s) probes in rationals.
    """
    if isinstance(conjugate, ConjugateResult):
        conjugate = conjugate.function
    if isinstance(f, GridFn):
        conjugate = conjugate if conjugate is not None else conjugate_grid(f).function
        if not isinstance(conjugate, GridFn):
            raise InputError("A grid function needs a grid conjugate")
        nodes = f.spec.nodes()[f.finite_mask.ravel()]
        values = f.values.ravel()[f.finite_mask.ravel()]
        slopes = conjugate.spec.nodes()[conjugate.finite_mask.ravel()]
        conj_values = conjugate.values.ravel()[conjugate.finite_mask.ravel()]
        # max over z of s.z - f(z) - f*(s), per slope
        margins = conjugate_at(f, slopes) - conj_values
        k = int(np.argmax(margins))
        worst = float(margins[k])
        best_z = nodes[int(np.argmax(nodes @ slopes[k] - values))]
        witness = [best_z.tolist(), slopes[k].tolist()]
        inputs = {"f": describe(f), "conjugate": describe(conjugate)}
        return _report("fenchel-young", inputs, worst, tol, witness)
    if isinstance(f, (MaxAffineFn, GeneratorFn)):
        conjugate = conjugate if conjugate is not None else conjugate_exact(f)
        if not probes:
            raise InputError("Exact Fenchel-Young check needs (z, s) probes")
        worst, witness = float("-inf"), None
        for z, s in probes:
            z, s = to_fraction_vector(z), to_fraction_vector(s)
            fz, fs = f.evaluate(z), conjugate.evaluate(s)
            if not (is_finite(fz) and is_finite(fs)):
                continue
            margin = dot(s, z) - fz - fs
            if margin > worst:
                worst, witness = margin, ext_to_json([list(z), list(s)])
        worst = float(worst) if witness is not None else 0.0
        return _report("fenchel-young", {"f": describe(f), "conjugate": describe(conjugate)}, worst, tol, witness)
    raise InputError("Fenchel-Young check needs a grid or exact function", type(f).__name__)


def order_reversal_check(f, g, probes: Optional[Sequence[Sequence]] = None, tol: float = 1e-9,
                         check_premise: bool = True) -> LemmaReport:
    """
    f <= g implies f* >= g*. The premise is tested first (grid nodes, or the generator points
    of g for exact forms); a failed premise yields a skipped report.
    """
    inputs = {"f": describe(f), "g": describe(g)}
    if isinstance(f, GridFn) and isinstance(g, GridFn):
        if f.spec != g.spec:
            raise InputError("Order reversal on grids needs a common grid")
        if check_premise and (f.values > g.values + tol).any():
            return _skipped("order-reversal", inputs, "premise f <= g does not hold on the grid")
        dual = conjugate_grid(f).function.spec
        fc = conjugate_grid(f, dual).function.values.ravel()
        gc = conjugate_grid(g, dual).function.values.ravel()
        margins = gc - fc
        k = int(np.argmax(margins))
        return _report("order-reversal", inputs, float(margins[k]), tol, dual.nodes()[k].tolist())
    if isinstance(f, GeneratorFn) and isinstance(g, GeneratorFn):
        if check_premise and any(f.evaluate(p) > v for p, v in g.generators):
            return _skipped("order-reversal", inputs, "premise f <= g fails at a generator of g")
        if not probes:
            raise InputError("Exact order reversal check needs probes")
        fc, gc = conjugate_exact(f), conjugate_exact(g)
        worst, witness = float("-inf"), None
        for s in probes:
            s = to_fraction_vector(s)
            margin = gc.evaluate(s) - fc.evaluate(s)
            if margin > worst:
                worst, witness = margin, ext_to_json(list(s))
        return _report("order-reversal", inputs, float(worst), tol, witness)
    raise InputError("Order reversal needs two grids or two generator functions")


# --------------------------------------------------------------------------- #
# Sign of the pairing on D(J delta_T)
# --------------------------------------------------------------------------- #

def check_gg(T: PwlCurve1d, window: float = 2.0, resolution: int = 17, assume_maximal: bool = False) -> LemmaReport:
    """
    Wherever J delta_T(x, x*) = sup over T of x y* + y x* is finite, x x* <= 0.
    Probes are the nodes of a symmetric (x, x*) grid, evaluated exactly.
    """
    if not isinstance(T, PwlCurve1d):
        raise InputError("The pairing-sign check runs on piecewise-linear curves", type(T).__name__)
    if not assume_maximal and not is_maximal_1d(T):
        raise PreconditionError("Curve is not maximal monotone")
    spec = GridSpec.symmetric(2, window, resolution)
    worst, witness, finite_count = None, None, 0
    for index in np.ndindex(*spec.shape):
        z = spec.exact_node(index)
        if not is_finite(jdelta_pwl1d_eval(T, z)):
            continue
        finite_count += 1
        value = pairing(z)
        if worst is None or value > worst:
            worst, witness = value, ext_to_json(list(z))
    note = f"{finite_count} of {spec.size} probes in D(J delta_T)"
    if worst is None:
        return _report("pairing-sign", {"curve": repr(T), "grid": spec.to_dict()}, 0.0, 0.0, note=note)
    return _report("pairing-sign", {"curve": repr(T), "grid": spec.to_dict()}, float(worst), 0.0, witness,
                   note=note, holds=worst <= 0)


# --------------------------------------------------------------------------- #
# Lipschitz profile of a conjugate
# --------------------------------------------------------------------------- #

def lipschitz_profile(conjugate: ConjugateResult, block: str, L, h=None, tol: float = 1e-9) -> LemmaReport:
    """
    Differences of the (J-)conjugate along `block` are at most L per unit step, its trusted
    domain is (projection) x (full block axes), and the projection stays in B[L].

    With `h` given, the precondition (the other block of D(h) inside B[L]) is checked first
    and a violation gives a skipped report.
    """
    if block not in (PRIMAL, DUAL):
        raise InputError("Block must be 'primal' or 'dual'", block)
    other = DUAL if block == PRIMAL else PRIMAL
    fn = conjugate.function
    inputs = {"conjugate": describe(fn), "block": block, "L": str(L)}
    lemma_id = f"lipschitz-{block}"
    if h is not None:
        projected = project_domain(h, other)
        if isinstance(projected, VPolytope):
            radius_sq = max(sum(v * v for v in p) for p in projected.vertices)
            if radius_sq > to_fraction(L) ** 2:
                return _skipped(lemma_id, inputs, "precondition: projection of D(h) is not inside B[L]")
        elif hasattr(projected, "touches_window"):
            if projected.touches_window() or projected.max_norm() > float(L) + tol:
                return _skipped(lemma_id, inputs, "precondition: projection of D(h) is not inside B[L] on the window")
    if isinstance(fn, MaxAffineFn):
        slope_sq = fn.block_slope_norm_sq(block)
        bound_sq = to_fraction(L) ** 2
        margin = float(slope_sq - bound_sq)
        return _report(lemma_id, inputs, margin, 0.0, holds=slope_sq <= bound_sq,
                       witness={"slope_norm_sq": ext_to_json(slope_sq)}, note="exact slope comparison")
    if not isinstance(fn, GridFn) or conjugate.saturation_mask is None:
        raise InputError("Lipschitz profile needs a grid conjugate or a max-affine form", type(fn).__name__)

    spec = fn.spec
    L = float(L)
    trusted = ~conjugate.saturation_mask & fn.finite_mask
    axes = spec.block_axes(block)
    worst, witness = float("-inf"), None
    for axis in axes:
        step = spec.axes[axis].spacing
        diffs = np.abs(np.diff(fn.values, axis=axis))
        both = np.take(trusted, range(1, spec.shape[axis]), axis=axis) & \
            np.take(trusted, range(0, spec.shape[axis] - 1), axis=axis)
        if not both.any():
            continue
        excess = np.where(both, diffs - L * step, -np.inf)
        k = np.unravel_index(int(np.argmax(excess)), excess.shape)
        if excess[k] > worst:
            worst, witness = float(excess[k]), spec.nodes()[np.ravel_multi_index(k, spec.shape)].tolist()
    # finite set must be constant along the block axes (domain = projection x full axes);
    # saturation only trims the reach comparison below
    finite = fn.finite_mask
    factorizes = bool((finite == finite.any(axis=axes, keepdims=True)).all())
    other_axes = spec.block_axes(other)
    projected = trusted.any(axis=axes)
    other_nodes = np.stack([g.ravel() for g in np.meshgrid(*[spec.axes[i].coords for i in other_axes],
                                                            indexing="ij")], axis=1)[projected.ravel()]
    reach = float(np.sqrt((other_nodes ** 2).sum(axis=1)).max()) if len(other_nodes) else 0.0
    inside = reach <= L + spec.max_spacing + tol
    worst = worst if witness is not None else 0.0
    holds = worst <= tol and factorizes and inside
    note = f"domain factorizes: {factorizes}; projection reach {reach:.6g} vs L = {L:.6g}"
    logger.debug(f"{lemma_id}: worst {worst}, {note}")
    return _report(lemma_id, inputs, worst, tol, witness, note=note, holds=holds)
