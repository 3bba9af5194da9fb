from fractions import Fraction

import numpy as np
import pytest

from src.core.convex.functions import PRIMAL, GridFn, GridSpec
from src.core.convex.geometry import HPolyhedron
from src.core.fitzpatrick import phi_finite, sigma_finite
from src.core.gates import (
    bounded_domain_report,
    bounded_range_report,
    build_cw_h,
    check_majorizes_pi,
    cw_pipeline,
    extract_operator,
    grid_slice_lipschitz,
    hausdorff_inf,
    main_pipeline,
    representability_gate,
    rotation_reference,
    run_gate,
)
from src.core.lemmas import separable_sum_grid
from src.core.operators.models import LinearOperator, identity_curve, rotation_operator, sign_curve
from src.core.operators.predicates import sample_graph
from src.validation.error_handler import (
    AssertionViolation,
    InputError,
    PreconditionError,
    UnsupportedRepresentationError,
)

SPEC = GridSpec.symmetric(2, 2.0, 17)


def _grid(fn):
    return GridFn.from_callable(SPEC, fn)


# --------------------------------------------------------------------------- #
# Gate
# --------------------------------------------------------------------------- #

def test_gate_accepts_self_dual_quadratic(square_grid):
    report, jh = run_gate(square_grid)
    assert report.holds
    assert report.h_ge_pi.points_checked == square_grid.spec.size
    assert jh.function.spec == square_grid.spec
    assert "not tested" in report.domain_condition_note


def test_gate_accepts_sign_sum():
    assert representability_gate(separable_sum_grid("subdifferential of |y|", 2.0, 17)).holds


def test_gate_rejects_zero():
    report = representability_gate(_grid(lambda x, xs: np.zeros_like(x)))
    assert not report.holds
    assert not report.h_ge_pi.holds
    assert report.h_ge_pi.witness is not None
    assert report.h_ge_pi.worst_violation == pytest.approx(4.0)


def test_gate_rejects_single_point_indicator():
    h = _grid(lambda x, xs: np.where((x == 0) & (xs == 1), 0.0, np.inf))
    report = representability_gate(h)
    # h >= pi at its only finite node, but Jh(x, x*) = x falls below pi
    assert report.h_ge_pi.holds
    assert not report.jh_ge_pi.holds


def test_gate_needs_convex_data():
    with pytest.raises(UnsupportedRepresentationError):
        run_gate(_grid(lambda x, xs: x * xs))


def test_majorization_on_probes(diagonal_pair):
    phi = phi_finite(diagonal_pair)
    check = check_majorizes_pi(phi, probes=[(1, 1), (Fraction(1, 2), Fraction(1, 2))])
    # a non-maximal operator: phi drops below pi between its two points
    assert not check.holds
    assert check.worst_violation == pytest.approx(0.25)
    assert check.witness == [0.5, 0.5]
    assert check_majorizes_pi(sigma_finite(diagonal_pair), probes=[(1, 1), (0, 1)]).holds
    with pytest.raises(UnsupportedRepresentationError):
        check_majorizes_pi(phi)


# --------------------------------------------------------------------------- #
# Extraction
# --------------------------------------------------------------------------- #

def test_extraction_recovers_the_identity(square_grid):
    result = extract_operator(square_grid, tol=1e-9)
    graph = np.asarray(result.graph)
    # the diagonal minus the two saturated corner nodes
    assert result.candidates == 15
    assert len(graph) == 15
    assert result.monotone
    np.testing.assert_array_equal(graph[:, 0], graph[:, 1])
    assert result.operator().n == 1


def test_extraction_keeps_fiber_minima(square_grid):
    result = extract_operator(square_grid, tol=0.1)
    # one node above and one below the diagonal per fiber pass the tolerance
    assert result.candidates == 43
    assert result.fiber_minima == 15
    assert result.rejected == 0 and result.candidates_monotone
    graph = np.asarray(result.graph)
    np.testing.assert_array_equal(graph[:, 0], graph[:, 1])


def test_extraction_reports_what_the_monotone_filter_drops(square_grid):
    result = extract_operator(square_grid, tol=0.1, fiber_minima=False)
    assert result.fiber_minima == result.candidates == 43
    assert result.rejected > 0
    assert not result.candidates_monotone
    assert result.monotone
    assert len(result.graph) + result.rejected == 43
    dropped, kept = np.asarray(result.rejected_witness)
    assert (dropped[0] - kept[0]) * (dropped[1] - kept[1]) < 0
    assert kept.tolist() in result.graph


def test_extraction_reports_distance_to_reference(square_grid):
    reference = sample_graph(identity_curve(), HPolyhedron.box([(-2, 2), (-2, 2)]), 17).as_array()
    result = extract_operator(square_grid, tol=1e-9, reference=reference)
    assert result.hausdorff_to_reference == pytest.approx(0.25)


def test_extraction_refuses_a_failed_gate():
    with pytest.raises(PreconditionError):
        extract_operator(_grid(lambda x, xs: np.zeros_like(x)))


def test_hausdorff_in_max_norm():
    assert hausdorff_inf(np.array([[0.0, 0.0]]), np.array([[1.0, 2.0]])) == 2.0
    assert hausdorff_inf(np.zeros((0, 2)), np.array([[1.0, 2.0]])) == float("inf")


# --------------------------------------------------------------------------- #
# Bounded range and domain
# --------------------------------------------------------------------------- #

def test_finite_range_report(diagonal_pair):
    report = bounded_range_report(diagonal_pair)
    assert report.bounded and report.holds
    assert report.bound == 1.0
    assert report.lipschitz_estimate == 1.0


def test_sign_curve_has_unit_lipschitz_slices():
    report = bounded_range_report(sign_curve(), window=2.0, resolution=17)
    assert report.bounded and report.holds
    assert report.bound == 1.0
    assert report.lipschitz_estimate == pytest.approx(1.0)


@pytest.mark.parametrize("subject", [identity_curve(), rotation_operator()])
def test_unbounded_projections_make_no_claim(subject):
    report = bounded_range_report(subject)
    assert not report.bounded
    assert report.holds
    assert "no claim" in report.note


def test_zero_map_has_bounded_range():
    report = bounded_range_report(LinearOperator.of([[0]]))
    assert report.bounded and report.bound == 0.0
    domain = bounded_domain_report(LinearOperator.of([[0]]))
    assert not domain.bounded
    assert domain.note.startswith("projection is unbounded") and "P1 D(h)" in domain.note


def test_grid_range_reports():
    band = _grid(lambda x, xs: np.where(np.abs(xs) <= 1.0, np.abs(x), np.inf))
    report = bounded_range_report(band)
    assert report.bounded and report.holds and report.window_limited
    assert report.bound == 1.0
    steep = _grid(lambda x, xs: np.where(np.abs(xs) <= 1.0, 2 * np.abs(x), np.inf))
    assert not bounded_range_report(steep).holds
    assert not bounded_domain_report(band).bounded


def test_generator_range_report(diagonal_pair):
    report = bounded_range_report(sigma_finite(diagonal_pair))
    assert report.bounded and report.holds
    assert report.bound == 1.0


def test_boundedness_needs_a_known_subject():
    with pytest.raises(InputError):
        bounded_range_report("not an operator")


def test_slice_lipschitz_of_quadratic(square_grid):
    estimate, real_valued = grid_slice_lipschitz(square_grid, PRIMAL)
    assert real_valued
    assert estimate == pytest.approx(1.875)


# --------------------------------------------------------------------------- #
# Pipelines
# --------------------------------------------------------------------------- #

def test_bounded_range_instance_grid():
    h = build_cw_h(window=2.0, resolution=5)
    assert h.spec.shape == (5, 5, 5, 5)
    assert h.values[2, 2, 2, 2] == 0.0
    assert np.isinf(h.values[2, 2, 4, 4])
    reference = rotation_reference(h.spec)
    np.testing.assert_array_equal(reference[:, 2], -reference[:, 1])
    np.testing.assert_array_equal(reference[:, 3], reference[:, 0])
    assert np.all((reference[:, :2] ** 2).sum(axis=1) <= 1.0 + 1e-12)


def test_bounded_range_instance_needs_resolution():
    with pytest.raises(PreconditionError):
        cw_pipeline(resolution=5)


def test_pipeline_needs_bounded_dual_projection(square_grid):
    with pytest.raises(PreconditionError):
        main_pipeline(square_grid)


def test_pipeline_stops_at_a_failed_gate():
    h = _grid(lambda x, xs: np.where(np.abs(xs) <= 1.0, 0.0, np.inf))
    with pytest.raises(AssertionViolation):
        main_pipeline(h)


def test_pipeline_on_sign_sum():
    h = separable_sum_grid("subdifferential of |y|", 2.0, 17)
    reference = sample_graph(sign_curve(), HPolyhedron.box([(-2, 2), (-2, 2)]), 33).as_array()
    report = main_pipeline(h, reference=reference, hausdorff_limit=2 * h.spec.max_spacing)
    assert report.holds
    assert report.range_bound == 1.0
    assert report.fibers_covered == report.fibers_required == 17
    assert report.hausdorff_to_reference <= report.hausdorff_limit


@pytest.mark.parametrize("resolution", [17, 33])
def test_bounded_range_instance_end_to_end(resolution):
    report = cw_pipeline(resolution=resolution)
    assert report.gate.holds
    assert report.range_inside_bound
    assert report.fibers_covered == report.fibers_required
    assert report.hausdorff_limit == pytest.approx(2 * 4.0 / (resolution - 1))
    assert report.hausdorff_to_reference <= report.hausdorff_limit
    assert report.holds
