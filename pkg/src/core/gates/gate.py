"""
Representability gate (h >= pi and Jh >= pi) and extraction of the operator

    T = {(x, x*) : Jh(x, x*) = <x, x*>}

from a grid representation.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from src.api.models.report_models import ExtractionResult, GateReport, MajorizationCheck
from src.core.convex.extended import to_float
from src.core.convex.functions import GridFn, pairing, pairing_array
from src.core.fitzpatrick.membership import Evaluable, point_evaluator
from src.core.legendre.transform import ConjugateResult, j_transform
from src.core.operators.predicates import monotone_violations_array
from src.utils.helpers import to_fraction_vector
from src.utils.logging import logger
from src.validation.error_handler import PreconditionError, UnsupportedRepresentationError

DEFAULT_DOMAIN_NOTE = (
    "Subspace condition on P1D(h) is not tested numerically; "
    "declared P1D(h) shape: {declared}"
)
# exact equalities on the grid are accepted as a block before the greedy pass
_EXACT_GAP = 1e-12
_MONOTONE_EPS = 1e-12


def check_majorizes_pi(h: Evaluable, probes: Optional[Sequence] = None, tol: float = 1e-9,
                       mask: Optional[np.ndarray] = None) -> MajorizationCheck:
    """
    worst = max(pi - h) over the probes (or every grid node off `mask`); holds iff worst <= tol.
    """
    if isinstance(h, GridFn) and probes is None:
        nodes = h.spec.nodes()
        considered = np.ones(len(nodes), dtype=bool) if mask is None else ~np.asarray(mask).ravel()
        if not considered.any():
            return MajorizationCheck(holds=True, worst_violation=float("-inf"), points_checked=0)
        deficit = pairing_array(nodes) - h.values.ravel()
        deficit[~considered] = -np.inf
        k = int(np.argmax(deficit))
        worst = float(deficit[k])
        return MajorizationCheck(holds=worst <= tol, worst_violation=worst,
                                 witness=nodes[k].tolist() if worst > tol else None,
                                 points_checked=int(considered.sum()))
    if probes is None:
        raise UnsupportedRepresentationError("Probe points are required for non-grid functions")
    evaluate = point_evaluator(h, tol) if not isinstance(h, GridFn) else None
    worst, witness = float("-inf"), None
    for z in probes:
        z = to_fraction_vector(z)
        value = evaluate(z) if evaluate else h.value_at([float(v) for v in z], tol)
        deficit = float(pairing(z) - value) if value != float("inf") else float("-inf")
        if deficit > worst:
            worst, witness = deficit, [to_float(v) for v in z]
    holds = worst <= tol
    return MajorizationCheck(holds=holds, worst_violation=worst, witness=None if holds else witness,
                             points_checked=len(probes))


def run_gate(h: GridFn, tol: float = 1e-6, method: str = "llt",
             declared_domain: str = "full window box") -> Tuple[GateReport, ConjugateResult]:
    """The gate report together with the grid Jh it was computed from."""
    h.require_proper()
    if not h.is_discretely_convex(max(tol, 1e-9)):
        raise UnsupportedRepresentationError("Grid data is not convex", "the gate needs a convex h")
    logger.info(f"Representability gate on grid {h.spec.shape}")
    jh = j_transform(h, method=method)
    report = GateReport(
        h_ge_pi=check_majorizes_pi(h, tol=tol),
        jh_ge_pi=check_majorizes_pi(jh.function, tol=tol, mask=jh.saturation_mask),
        domain_condition_note=DEFAULT_DOMAIN_NOTE.format(declared=declared_domain),
        tolerance=tol,
    )
    logger.info(f"Gate: h>=pi {report.h_ge_pi.holds}, Jh>=pi {report.jh_ge_pi.holds}")
    return report, jh


def representability_gate(h: GridFn, tol: float = 1e-6, method: str = "llt",
                          declared_domain: str = "full window box") -> GateReport:
    """Checks h >= pi at every node and Jh >= pi at every node off the saturation mask."""
    return run_gate(h, tol, method, declared_domain)[0]


def hausdorff_inf(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two point clouds in the max-norm."""
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    forward, _ = cKDTree(b).query(a, p=np.inf)
    backward, _ = cKDTree(a).query(b, p=np.inf)
    return float(max(forward.max(), backward.max()))


def _mutually_monotone(points: np.ndarray, chunk: int = 2048) -> bool:
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk]
        half = points.shape[1] // 2
        dx = block[:, None, :half] - points[None, :, :half]
        ds = block[:, None, half:] - points[None, :, half:]
        if (np.einsum('ijk,ijk->ij', dx, ds) < -_MONOTONE_EPS).any():
            return False
    return True


def _select_monotone(nodes: np.ndarray, gaps: np.ndarray, primary: Optional[np.ndarray] = None,
                     fibers: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Admit candidates in increasing gap order, keeping each only if it is monotonically
    related to everything admitted before. Returns indices into `nodes`.

    Primary candidates go first (exact equalities as one block when mutually monotone).
    The others only stand in for fibers left without a node, one per fiber.
    """
    primary = np.ones(len(gaps), dtype=bool) if primary is None else primary
    order = np.lexsort((np.arange(len(gaps)), gaps))
    first, second = order[primary[order]], order[~primary[order]]
    exact = first[gaps[first] <= _EXACT_GAP]
    if len(exact) and _mutually_monotone(nodes[exact]):
        chosen = list(exact)
        first = first[gaps[first] > _EXACT_GAP]
    else:
        chosen = []
    half = nodes.shape[1] // 2
    selected = np.empty((len(nodes), nodes.shape[1]))
    count = len(chosen)
    selected[:count] = nodes[chosen]

    def admit(k) -> bool:
        nonlocal count
        if count:
            dx = nodes[k, :half] - selected[:count, :half]
            ds = nodes[k, half:] - selected[:count, half:]
            if (np.einsum('ij,ij->i', dx, ds) < -_MONOTONE_EPS).any():
                return False
        selected[count] = nodes[k]
        count += 1
        chosen.append(k)
        return True

    for k in first:
        admit(k)
    if len(second):
        served = set(fibers[chosen].tolist())
        for k in second:
            if fibers[k] not in served and admit(k):
                served.add(fibers[k])
    return np.sort(np.asarray(chosen, dtype=np.int64))


def _fiber_minima(gap: np.ndarray, candidate: np.ndarray, shape: Tuple[int, ...], n: int) -> np.ndarray:
    """
    Candidates whose gap is minimal (up to _EXACT_GAP) among the candidates sharing their
    primal node: the discrete selection x -> argmin_{x*} Jh(x, x*) - <x, x*>.
    """
    primal = int(np.prod(shape[:n]))
    per_fiber = np.where(candidate, gap, np.inf).reshape(primal, -1)
    floor = per_fiber.min(axis=1, keepdims=True)
    return candidate & (per_fiber <= floor + _EXACT_GAP).ravel()


def _conflict(nodes: np.ndarray, rejected: np.ndarray, selected: np.ndarray) -> Optional[List[List[float]]]:
    """A rejected node together with a selected node it is not monotonically related to."""
    half = nodes.shape[1] // 2
    for k in rejected:
        dx = nodes[k, :half] - nodes[selected, :half]
        ds = nodes[k, half:] - nodes[selected, half:]
        products = np.einsum('ij,ij->i', dx, ds)
        j = int(np.argmin(products))
        if products[j] < -_MONOTONE_EPS:
            return [nodes[k].tolist(), nodes[selected[j]].tolist()]
    return None


def extract_operator(h: GridFn, tol: Optional[float] = None, gate_tol: float = 1e-6,
                     method: str = "llt", reference: Optional[np.ndarray] = None,
                     declared_domain: str = "full window box",
                     gate: Optional[Tuple[GateReport, ConjugateResult]] = None,
                     fiber_minima: bool = True) -> ExtractionResult:
    """
    Nodes of {Jh = pi} on the grid, in three filters:

    1. candidates: off the saturation mask, Jh finite, Jh - pi <= tol
       (default: grid spacing times 1 + |Jh|);
    2. fiber minima: per primal node only the candidates of least gap are kept
       (skipped with fiber_minima=False);
    3. monotone selection: greedy in increasing gap order, exact equalities first.

    `rejected` counts the fiber minima the third filter dropped, and `rejected_witness`
    shows one of them with the selected node it conflicts with. A fiber that lost all its
    minima takes its best remaining candidate instead (`substitutes`).

    Raises:
        PreconditionError: the gate does not hold for h
    """
    report, jh = gate or run_gate(h, gate_tol, method, declared_domain)
    if not report.holds:
        witness = report.h_ge_pi.witness or report.jh_ge_pi.witness
        raise PreconditionError("Representability gate failed; extraction refused", witness)

    spec = jh.function.spec
    nodes = spec.nodes()
    values = jh.function.values.ravel()
    gap = values - pairing_array(nodes)
    if tol is None:
        allowance = h.spec.max_spacing * (1.0 + np.abs(values))
        used_tol = float(h.spec.max_spacing)
    else:
        allowance = np.full(len(values), float(tol))
        used_tol = float(tol)
    candidate = (~jh.saturation_mask.ravel()) & np.isfinite(values) & (gap <= allowance)
    index = np.flatnonzero(candidate)
    if fiber_minima:
        primary = _fiber_minima(gap, candidate, spec.shape, spec.n)[index]
    else:
        primary = np.ones(len(index), dtype=bool)
    fibers = index // int(np.prod(spec.shape[spec.n:]))
    chosen = index[_select_monotone(nodes[index], gap[index], primary, fibers)]
    minima = index[primary]
    rejected = np.setdiff1d(minima, chosen)
    substitutes = int(len(chosen) - len(np.intersect1d(minima, chosen)))
    graph = nodes[chosen]
    monotone = monotone_violations_array(graph, tol=_MONOTONE_EPS) is None if len(graph) <= 1024 \
        else _mutually_monotone(graph)
    logger.info(f"Extraction: {len(index)} candidates, {len(minima)} fiber minima, {len(graph)} kept, "
                f"{len(rejected)} rejected as non-monotone, {substitutes} substitutes")
    return ExtractionResult(
        graph=graph.tolist(),
        tol=used_tol,
        candidates=int(len(index)),
        fiber_minima=int(len(minima)),
        rejected=int(len(rejected)),
        rejected_witness=_conflict(nodes, rejected, chosen) if len(rejected) else None,
        substitutes=substitutes,
        monotone=monotone,
        hausdorff_to_reference=None if reference is None else hausdorff_inf(graph, np.asarray(reference, dtype=float)),
    )
