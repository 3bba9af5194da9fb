"""
The verification battery: every checker over the catalog, plus fixed closed-form grid
members of the family and one negative control per checker.

A regular report passes when it holds, a negative control when it fails; the battery
passes when every report passes.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.api.models.report_models import BoundednessReport, GateReport, LemmaReport, PipelineReport
from src.core.convex.functions import DUAL, PRIMAL, GridFn, GridSpec
from src.core.convex.geometry import HPolyhedron
from src.core.fitzpatrick.constructions import phi_finite, sigma_finite
from src.core.fitzpatrick.membership import minimality_maximality_envelope
from src.core.gates.bounds import bounded_domain_report, bounded_range_report
from src.core.gates.cw import MIN_CW_RESOLUTION, cw_pipeline, main_pipeline
from src.core.gates.gate import representability_gate
from src.core.legendre.transform import ConjugateResult, conjugate_grid, j_transform
from src.core.lemmas.catalog import CatalogEntry
from src.core.lemmas.domains import (
    check_domain_invariance,
    check_projection_inclusions,
    check_range_domain_duality,
    check_recession_inclusion,
)
from src.core.lemmas.inequalities import (
    check_conjugate_shift,
    check_gg,
    describe,
    fenchel_young_check,
    lipschitz_profile,
    order_reversal_check,
)
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    PwlCurve1d,
    SlopedPiece,
    identity_curve,
    sign_curve,
)
from src.core.operators.predicates import sample_graph
from src.core.serialization import encode_operator
from src.utils.helpers import digest, random_rationals
from src.utils.logging import logger
from src.validation.error_handler import AssertionViolation, InputError, PreconditionError

SUITES = ("lemmas", "gate", "pipeline", "all")

_DISC_SLACK = 1e-12


@dataclass
class BatteryResult:
    suite: str
    reports: List[LemmaReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failures(self) -> List[LemmaReport]:
        return [r for r in self.reports if not r.passed]


def _tag(report: LemmaReport, subject: str, expected_failure: bool = False) -> LemmaReport:
    return report.model_copy(update={"subject": subject, "expected_failure": expected_failure})


# --------------------------------------------------------------------------- #
# Report adapters
# --------------------------------------------------------------------------- #

def gate_lemma(report: GateReport, inputs) -> LemmaReport:
    worst = max(report.h_ge_pi.worst_violation, report.jh_ge_pi.worst_violation)
    return LemmaReport(lemma_id="representability-gate", inputs_digest=digest(inputs), holds=report.holds,
                       worst_margin=worst, witness=report.h_ge_pi.witness or report.jh_ge_pi.witness,
                       note=report.domain_condition_note)


def boundedness_lemma(report: BoundednessReport, inputs) -> LemmaReport:
    margin = 0.0
    if report.bound is not None and report.lipschitz_estimate is not None:
        margin = report.lipschitz_estimate - report.bound
    witness = None if report.holds else {"bound": report.bound, "lipschitz_estimate": report.lipschitz_estimate}
    return LemmaReport(lemma_id=f"bounded-{report.block}", inputs_digest=digest(inputs), holds=report.holds,
                       worst_margin=margin, witness=witness,
                       note=report.note or f"L = {report.bound}, slice estimate {report.lipschitz_estimate}")


def pipeline_lemma(run: Callable[[], PipelineReport], inputs) -> LemmaReport:
    """A failed gate inside the pipeline is a failed report carrying the gate witness."""
    try:
        report = run()
    except AssertionViolation as e:
        return LemmaReport(lemma_id="bounded-range-pipeline", inputs_digest=digest(inputs), holds=False,
                           worst_margin=math.inf, witness=e.witness, note=e.message)
    margin = report.hausdorff_to_reference or 0.0
    witness = None if report.holds else (report.uncovered_fiber or report.gate.h_ge_pi.witness)
    note = (f"L = {report.range_bound:.6g}, fibers {report.fibers_covered}/{report.fibers_required}, "
            f"monotone {report.monotone}, Hausdorff {report.hausdorff_to_reference} (limit {report.hausdorff_limit})")
    return LemmaReport(lemma_id="bounded-range-pipeline", inputs_digest=digest(inputs), holds=report.holds,
                       worst_margin=margin, witness=witness, note=note)


def envelope_lemma(T: FiniteOperator, probes: Sequence) -> LemmaReport:
    """phi_T <= sigma_T and phi_T = J sigma_T; a non-monotone T fails with the offending pair."""
    inputs = encode_operator(T)
    try:
        report = minimality_maximality_envelope(T, probes)
    except PreconditionError as e:
        return LemmaReport(lemma_id="phi-sigma-envelope", inputs_digest=digest(inputs), holds=False,
                           worst_margin=math.inf, witness=e.details, note=e.message)
    return LemmaReport(lemma_id="phi-sigma-envelope", inputs_digest=digest(inputs), holds=report.holds,
                       worst_margin=report.worst_gap, witness=report.witness,
                       note=f"{report.probes} probes; phi <= sigma {report.phi_le_sigma}, "
                            f"phi = J sigma {report.phi_eq_jsigma}")


# --------------------------------------------------------------------------- #
# Closed-form grid members f(x) + f*(x*) of the family of the subdifferential of f
# --------------------------------------------------------------------------- #

def _ball(v):
    return np.abs(v) <= 1.0 + _DISC_SLACK


def _huber(v):
    return np.where(np.abs(v) <= 1.0, 0.5 * v ** 2, np.abs(v) - 0.5)


SEPARABLE_SUMS = {
    "identity": lambda x, xs: 0.5 * x ** 2 + 0.5 * xs ** 2,
    "subdifferential of |y|": lambda x, xs: np.where(_ball(xs), np.abs(x), np.inf),
    "normal cone of [-1, 1]": lambda x, xs: np.where(_ball(x), np.abs(xs), np.inf),
    "huber derivative": lambda x, xs: np.where(_ball(xs), _huber(x) + 0.5 * xs ** 2, np.inf),
}

# (name, block, L) for the conjugate Lipschitz profiles
LIPSCHITZ_CASES = (
    ("subdifferential of |y|", PRIMAL, 1),
    ("huber derivative", PRIMAL, 1),
    ("normal cone of [-1, 1]", DUAL, 1),
)


def separable_sum_grid(name: str, window: float, resolution: int) -> GridFn:
    return GridFn.from_callable(GridSpec.symmetric(2, window, resolution), SEPARABLE_SUMS[name])


def point_indicator_grid(window: float, resolution: int, point=(0.0, 1.0)) -> GridFn:
    """Indicator of a single node; h >= pi there, but Jh is affine and crosses pi."""
    spec = GridSpec.symmetric(2, window, resolution)
    return GridFn.from_callable(spec, lambda x, xs: np.where(
        (np.abs(x - point[0]) < _DISC_SLACK) & (np.abs(xs - point[1]) < _DISC_SLACK), 0.0, np.inf))


# --------------------------------------------------------------------------- #
# Per-operator checks
# --------------------------------------------------------------------------- #

def _probes(rng: np.random.Generator, T: FiniteOperator, count: int) -> List[tuple]:
    extra = random_rationals(rng, (count, 2 * T.n))
    return [p.flat for p in T.pairs] + [tuple(row) for row in extra]


def _shift_samples(rng: np.random.Generator, dim: int, count: int) -> List[tuple]:
    zs = random_rationals(rng, (count, dim))
    ws = random_rationals(rng, (count, dim))
    lams = random_rationals(rng, (1, count), bound=3)[0]
    return [(z, w, abs(l)) for z, w, l in zip(zs, ws, lams)]


def finite_checks(T: FiniteOperator, rng: np.random.Generator, tol: float) -> List[LemmaReport]:
    invariance = check_domain_invariance(T)
    if not invariance.holds:
        # remaining checks assume a monotone input
        return [invariance]
    reports = [invariance, envelope_lemma(T, _probes(rng, T, 8))]
    inputs = encode_operator(T)
    reports.append(boundedness_lemma(bounded_range_report(T), inputs))
    reports.append(boundedness_lemma(bounded_domain_report(T), inputs))

    sigma = sigma_finite(T)
    reports.append(check_conjugate_shift(sigma, _shift_samples(rng, 2 * T.n, 10)))
    reports.append(check_recession_inclusion(sigma, resolution=3 if T.n == 2 else 5))
    j_sigma = j_transform(sigma)
    range_bound = max(sum(v * v for v in y) for y in T.range_points)
    domain_bound = max(sum(v * v for v in y) for y in T.domain_points)
    # L is compared through L^2, so pass the exact square root only when it is rational
    reports.append(lipschitz_profile(j_sigma, PRIMAL, _exact_sqrt(range_bound), h=sigma))
    reports.append(lipschitz_profile(j_sigma, DUAL, _exact_sqrt(domain_bound), h=sigma))
    probes = _probes(rng, T, 6)
    reports.append(fenchel_young_check(sigma, probes=list(zip(probes, reversed(probes)))))
    if len(T) >= 2:
        smaller = sigma_finite(FiniteOperator(T.pairs[:-1]))
        reports.append(order_reversal_check(sigma, smaller, probes=probes))
    return reports


def _exact_sqrt(value: Fraction):
    """sqrt as a Fraction when exact, otherwise a float rounded up so L^2 >= value."""
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return math.nextafter(math.sqrt(float(value)), math.inf)


def curve_checks(T: PwlCurve1d, window: float, resolution: int) -> List[LemmaReport]:
    inputs = encode_operator(T)
    return [
        check_domain_invariance(T, window=window),
        check_range_domain_duality(T),
        check_gg(T, window=window),
        check_recession_inclusion(T, window=window),
        boundedness_lemma(bounded_range_report(T, window=window, resolution=resolution), inputs),
        boundedness_lemma(bounded_domain_report(T, window=window, resolution=resolution), inputs),
    ]


def linear_checks(T: LinearOperator) -> List[LemmaReport]:
    inputs = encode_operator(T)
    return [
        check_domain_invariance(T),
        check_range_domain_duality(T),
        boundedness_lemma(bounded_range_report(T), inputs),
        boundedness_lemma(bounded_domain_report(T), inputs),
    ]


def grid_member_checks(window: float, resolution: int, tol: float) -> List[LemmaReport]:
    reports = []
    for name in SEPARABLE_SUMS:
        h = separable_sum_grid(name, window, resolution)
        reports.append(_tag(check_projection_inclusions(h, "both"), f"{name}: f + f*"))
    for name, block, bound in LIPSCHITZ_CASES:
        h = separable_sum_grid(name, window, resolution)
        reports.append(_tag(lipschitz_profile(j_transform(h), block, bound, h=h, tol=tol), f"{name}: f + f*"))
    spec = GridSpec.symmetric(1, window, resolution)
    huber = GridFn.from_callable(spec, _huber)
    reports.append(_tag(fenchel_young_check(huber, tol=tol), "huber function"))
    half_square = GridFn.from_callable(spec, lambda z: 0.5 * z ** 2)
    reports.append(_tag(check_conjugate_shift(half_square, [((0,), (1,), Fraction(1, 2)), ((1,), (-1,), 1)], tol=tol),
                        "z^2/2"))
    reports.append(_tag(order_reversal_check(half_square, GridFn.from_callable(spec, lambda z: z ** 2), tol=tol),
                        "z^2/2 <= z^2"))
    return reports


def gate_checks(window: float, resolution: int, gate_tol: float) -> List[LemmaReport]:
    reports = []
    for name in SEPARABLE_SUMS:
        h = separable_sum_grid(name, window, resolution)
        reports.append(_tag(gate_lemma(representability_gate(h, tol=gate_tol), describe(h)), f"{name}: f + f*"))
    return reports


def pipeline_checks(window: float, resolution: int, gate_tol: float, cw_resolution: int) -> List[LemmaReport]:
    h = separable_sum_grid("subdifferential of |y|", window, resolution)
    box = HPolyhedron.box([(-window, window), (-window, window)])
    reference = sample_graph(sign_curve(), box, 2 * resolution - 1).as_array()
    limit = 2 * h.spec.max_spacing
    reports = [_tag(pipeline_lemma(lambda: main_pipeline(h, reference=reference, gate_tol=gate_tol,
                                                         hausdorff_limit=limit), describe(h)),
                    "subdifferential of |y|: f + f*")]
    cw_inputs = {"resolution": cw_resolution, "window": window}
    reports.append(_tag(pipeline_lemma(lambda: cw_pipeline(resolution=cw_resolution, window=window,
                                                           gate_tol=gate_tol), cw_inputs),
                        "bounded-range instance on R^4"))
    return reports


# --------------------------------------------------------------------------- #
# Negative controls
# --------------------------------------------------------------------------- #

def _segment_curve() -> PwlCurve1d:
    """{(y, 0) : |y| <= 1}: monotone, not maximal."""
    return PwlCurve1d((SlopedPiece.of(-1, 1, 0, 0),))


def negative_controls(suite: str, window: float, resolution: int, tol: float, gate_tol: float) -> List[LemmaReport]:
    controls = []

    def add(subject: str, report: LemmaReport):
        controls.append(_tag(report, subject, expected_failure=True))

    if suite in ("gate", "all"):
        spec = GridSpec.symmetric(2, window, resolution)
        zero = GridFn(spec, np.zeros(spec.shape))
        add("h = 0", gate_lemma(representability_gate(zero, tol=gate_tol), describe(zero)))
        single = point_indicator_grid(window, resolution)
        add("indicator of (0, 1)", gate_lemma(representability_gate(single, tol=gate_tol), describe(single)))
    if suite in ("pipeline", "all"):
        spec = GridSpec.symmetric(2, window, resolution)
        h = GridFn.from_callable(spec, lambda x, xs: np.where(_ball(xs), 0.5 * x ** 2 + 0.5 * xs ** 2, np.inf))
        add("x^2/2 + x*^2/2 on |x*| <= 1",
            pipeline_lemma(lambda: main_pipeline(h, gate_tol=gate_tol), describe(h)))
    if suite not in ("lemmas", "all"):
        return controls

    non_monotone = FiniteOperator.of([(0, 1), (1, 0)])
    add("{(0, 1), (1, 0)}", check_domain_invariance(non_monotone))
    add("{(0, 1), (1, 0)}", envelope_lemma(non_monotone, [p.flat for p in non_monotone.pairs]))
    add("indicator of (0, 1) declared Jh >= pi",
        check_projection_inclusions(point_indicator_grid(window, resolution), "jh_ge_pi"))
    add("segment curve taken as maximal", check_range_domain_duality(_segment_curve(), assume_maximal=True))
    add("segment curve taken as maximal", check_gg(_segment_curve(), window=window, assume_maximal=True))
    identity = identity_curve()
    add("identity with D(Jh) replaced by the graph",
        check_recession_inclusion(identity, cone_domain=lambda z: z[0] == z[1], window=window))

    line_spec = GridSpec.symmetric(1, window, resolution)
    line = GridFn.from_callable(line_spec, lambda z: -z)
    add("f = -z with the support of {0}",
        check_conjugate_shift(line, [((0,), (1,), 1)], tol=tol, support=lambda w: 0))
    half_square = GridFn.from_callable(line_spec, lambda z: 0.5 * z ** 2)
    shifted = conjugate_grid(half_square).function
    shifted = GridFn(shifted.spec, shifted.values - 1.0)
    add("z^2/2 with f* - 1", fenchel_young_check(half_square, conjugate=shifted, tol=tol))
    pair = FiniteOperator.of([(0, 0), (1, 1)])
    add("premise reversed", order_reversal_check(sigma_finite(FiniteOperator(pair.pairs[:1])), sigma_finite(pair),
                                                 probes=[(10, 10)], check_premise=False))
    add("L below max |y*|", lipschitz_profile(ConjugateResult(phi_finite(pair)), PRIMAL, Fraction(1, 2)))

    spec = GridSpec.symmetric(2, window, resolution)
    unbounded = GridFn.from_callable(spec, lambda x, xs: 0.5 * x ** 2 + 0.5 * xs ** 2)
    add("conjugate of x^2/2 + x*^2/2 with L = 1",
        lipschitz_profile(conjugate_grid(unbounded, spec), DUAL, 1))
    steep_x = GridFn.from_callable(spec, lambda x, xs: np.where(_ball(xs), 2 * np.abs(x), np.inf))
    steep_xs = GridFn.from_callable(spec, lambda x, xs: np.where(_ball(x), 2 * np.abs(xs), np.inf))
    add("2|x| on |x*| <= 1", boundedness_lemma(bounded_range_report(steep_x), describe(steep_x)))
    add("2|x*| on |x| <= 1", boundedness_lemma(bounded_domain_report(steep_xs), describe(steep_xs)))
    return controls


# --------------------------------------------------------------------------- #
# Entry point
# --------------------------------------------------------------------------- #

def run_battery(catalog: Sequence[CatalogEntry], suite: str = "all", window: float = 2.0, resolution: int = 33,
                tol: float = 1e-9, gate_tol: float = 1e-6, seed: int = 20240611,
                cw_resolution: int = MIN_CW_RESOLUTION + 8,
                progress: Optional[Callable[[str], None]] = None) -> BatteryResult:
    """
    Args:
        catalog: operators to check (see catalog.load_catalog)
        suite: one of SUITES
        progress: called with a short label before each stage
    """
    if suite not in SUITES:
        raise InputError(f"Unknown suite; expected one of {', '.join(SUITES)}", suite)
    result = BatteryResult(suite)
    logger.info(f"Battery '{suite}' over {len(catalog)} operators (seed {seed})")

    def stage(label: str):
        logger.info(f"Battery stage: {label}")
        if progress:
            progress(label)

    if suite in ("lemmas", "all"):
        for index, entry in enumerate(catalog):
            stage(entry.name)
            T = entry.operator
            if isinstance(T, FiniteOperator):
                reports = finite_checks(T, np.random.default_rng([seed, index]), tol)
            elif isinstance(T, PwlCurve1d):
                reports = curve_checks(T, window, resolution)
            elif isinstance(T, LinearOperator):
                reports = linear_checks(T)
            else:
                raise InputError("Unsupported catalog operator", type(T).__name__)
            result.reports += [_tag(r, entry.name) for r in reports]
        stage("closed-form grid members")
        result.reports += grid_member_checks(window, resolution, tol)
    if suite in ("gate", "all"):
        stage("representability gate")
        result.reports += gate_checks(window, resolution, gate_tol)
    if suite in ("pipeline", "all"):
        stage("bounded-range pipelines")
        result.reports += pipeline_checks(window, resolution, gate_tol, cw_resolution)
    stage("negative controls")
    result.reports += negative_controls(suite, window, resolution, tol, gate_tol)

    failures = result.failures
    logger.info(f"Battery '{suite}': {len(result.reports)} reports, {len(failures)} not passed")
    for report in failures:
        logger.warning(f"{report.lemma_id} on {report.subject}: holds={report.holds}, "
                       f"expected_failure={report.expected_failure}, witness={report.witness}")
    return result
