"""
Point-sampled membership in the Fitzpatrick family and the phi <= sigma envelope.

A global test of h >= pi is an indefinite program, so membership is certified on the
listed points only; the report states how many were used.
"""
from fractions import Fraction
from typing import Callable, List, Sequence, Union

from src.api.models.report_models import EnvelopeReport, FamilyMembershipReport
from src.core.convex.extended import INF, ExtReal, is_finite, to_float
from src.core.convex.functions import GeneratorFn, GridFn, MaxAffineFn, PrimalDualPoint, pairing
from src.core.fitzpatrick.constructions import phi_finite, sigma_finite
from src.core.legendre.transform import j_transform
from src.core.operators.models import FiniteOperator
from src.core.operators.predicates import is_monotone
from src.utils.helpers import ext_to_json, to_fraction_vector
from src.utils.logging import logger
from src.validation.error_handler import PreconditionError, UnsupportedRepresentationError

Evaluable = Union[GridFn, MaxAffineFn, GeneratorFn, Callable[[Sequence], ExtReal]]

_MAX_WITNESSES = 5


def _flat(z) -> tuple:
    return z.flat if isinstance(z, PrimalDualPoint) else to_fraction_vector(z)


def point_evaluator(h: Evaluable, tol: float = 1e-9) -> Callable[[tuple], ExtReal]:
    """
    Uniform evaluation at flattened points.

    Grid functions are evaluated at nodes only and must be discretely convex: a
    non-convex sample (such as pi itself) is not a representation of anything here.
    """
    if isinstance(h, (MaxAffineFn, GeneratorFn)):
        return h.evaluate
    if isinstance(h, GridFn):
        if not h.is_discretely_convex(tol):
            raise UnsupportedRepresentationError("Grid data is not convex", "membership needs a convex representation")

        def grid_value(z):
            value = h.value_at([float(v) for v in z], tol)
            return INF if value == float("inf") else value
        return grid_value
    if callable(h):
        return h
    raise UnsupportedRepresentationError("Cannot evaluate", type(h).__name__)


def _difference(a: ExtReal, b: ExtReal) -> float:
    """a - b as a float with pi - (+inf) = -inf."""
    if not is_finite(b):
        return float("-inf") if b > 0 else float("inf")
    return to_float(a) - to_float(b)


def family_membership(h: Evaluable, graph_points: Sequence, check_points: Sequence,
                      tol: float = 1e-9) -> FamilyMembershipReport:
    """h >= pi on every listed point and h = pi on the graph points, within tol."""
    evaluate = point_evaluator(h, tol)
    witnesses: List[List] = []
    deficit = float("-inf")
    gap = 0.0
    graph = [_flat(z) for z in graph_points]
    checks = [_flat(z) for z in check_points]
    for z in checks + graph:
        value = evaluate(z)
        d = _difference(pairing(z), value)
        deficit = max(deficit, d)
        if d > tol and len(witnesses) < _MAX_WITNESSES:
            witnesses.append(["below_pi", ext_to_json(list(z)), ext_to_json(value)])
    for z in graph:
        value = evaluate(z)
        g = abs(_difference(value, pairing(z)))
        gap = max(gap, g)
        if g > tol and len(witnesses) < _MAX_WITNESSES:
            witnesses.append(["graph_gap", ext_to_json(list(z)), ext_to_json(value)])
    is_member = deficit <= tol and gap <= tol
    logger.debug(f"family_membership: {len(checks)} probes, {len(graph)} graph points, member={is_member}")
    return FamilyMembershipReport(
        is_member=is_member,
        max_deficit_below_pi=deficit if checks or graph else 0.0,
        max_graph_gap=gap,
        tolerance=tol,
        points_checked=len(checks) + len(graph),
        witnesses=witnesses,
    )


def minimality_maximality_envelope(T: FiniteOperator, probes: Sequence) -> EnvelopeReport:
    """phi_T <= sigma_T and phi_T = J sigma_T at every probe, in exact arithmetic."""
    check = is_monotone(T)
    if not check.holds:
        p, q = check.violation
        raise PreconditionError("Operator is not monotone",
                                ext_to_json([list(p.flat), list(q.flat)]))
    phi = phi_finite(T)
    sigma = sigma_finite(T)
    j_sigma = j_transform(sigma).function
    le, eq = True, True
    worst = float("-inf")
    witness = None
    for z in probes:
        z = _flat(z)
        phi_value = phi.evaluate(z)
        sigma_value = sigma.evaluate(z)
        if is_finite(sigma_value):
            worst = max(worst, float(phi_value - sigma_value))
        if phi_value > sigma_value:
            le = False
            witness = witness or ["phi_above_sigma", ext_to_json(list(z))]
        if phi_value != j_sigma.evaluate(z):
            eq = False
            witness = witness or ["phi_differs_from_j_sigma", ext_to_json(list(z))]
    return EnvelopeReport(holds=le and eq, phi_le_sigma=le, phi_eq_jsigma=eq,
                          worst_gap=worst if worst > float("-inf") else 0.0,
                          probes=len(probes), witness=witness)
