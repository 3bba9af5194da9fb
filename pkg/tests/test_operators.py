from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.convex.functions import PrimalDualPoint
from src.core.convex.geometry import HPolyhedron
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    PwlCurve1d,
    SlopedPiece,
    VerticalPiece,
    huber_derivative,
    identity_curve,
    interval_normal_cone,
    point_normal_cone,
    rotation_operator,
    sign_curve,
)
from src.core.operators.predicates import (
    is_maximal_1d,
    is_monotone,
    linear_is_monotone,
    monotone_gap,
    monotone_violations_array,
    sample_graph,
)
from src.validation.error_handler import InputError


def test_finite_operator_accepts_scalars_and_drops_repeats():
    T = FiniteOperator.of([(0, 0), (1, 1), (0, 0)])
    assert len(T) == 2
    assert T.n == 1
    assert T.domain_points == [(0,), (1,)]
    assert T.as_array().shape == (2, 2)


def test_finite_operator_rejects_mixed_dimensions():
    with pytest.raises(InputError):
        FiniteOperator.of([(0, 0), ((1, 2), (3, 4))])


def test_empty_operator_has_no_dimension():
    with pytest.raises(InputError):
        FiniteOperator(()).n


@pytest.mark.parametrize("pairs, holds", [
    ([(0, 0), (1, 1)], True),
    ([(0, 1), (1, 0)], False),
    ([((0, 0), (0, 0)), ((1, 0), (0, 1))], True),
    ([((0, 0), (1, 0)), ((1, 0), (0, 0))], False),
])
def test_exact_monotonicity(pairs, holds):
    check = is_monotone(FiniteOperator.of(pairs))
    assert check.holds is holds
    if not holds:
        p, q = check.violation
        assert monotone_gap(p, q) < 0


def test_float_violation_search_reports_worst_pair():
    points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, -3.0]])
    i, j, gap = monotone_violations_array(points)
    assert (i, j) == (0, 2)
    assert gap == -6.0
    assert monotone_violations_array(points[:2]) is None


def test_monotone_gap_is_exact():
    p = PrimalDualPoint.of([Fraction(1, 3)], [Fraction(1, 2)])
    q = PrimalDualPoint.of([0], [0])
    assert monotone_gap(p, q) == Fraction(1, 6)


@pytest.mark.parametrize("curve, maximal", [
    (identity_curve(), True),
    (sign_curve(), True),
    (interval_normal_cone(), True),
    (point_normal_cone(), True),
    (huber_derivative(), True),
    (PwlCurve1d((SlopedPiece.of(-1, 1, 1, 0),)), False),
    (PwlCurve1d((SlopedPiece.of(None, 0, 0, 0),)), False),
])
def test_curve_maximality(curve, maximal):
    assert is_maximal_1d(curve) is maximal


def test_maximality_needs_a_curve():
    with pytest.raises(InputError):
        is_maximal_1d(FiniteOperator.of([(0, 0)]))


def test_curve_segments_must_connect():
    with pytest.raises(InputError):
        PwlCurve1d((SlopedPiece.of(None, 0, 0, -1), SlopedPiece.of(0, None, 0, 1)))
    with pytest.raises(InputError):
        SlopedPiece.of(0, 1, -1, 0)


def test_curve_membership_and_hulls():
    curve = sign_curve()
    assert curve.contains(0, Fraction(1, 2))
    assert curve.contains(-3, -1)
    assert not curve.contains(1, 0)
    assert curve.domain_interval == (None, None)
    assert curve.range_interval == (-1, 1)
    assert interval_normal_cone().domain_interval == (-1, 1)
    assert interval_normal_cone().range_interval == (None, None)
    assert point_normal_cone(2).domain_interval == (2, 2)


@pytest.mark.parametrize("matrix, monotone", [
    ([[0, -1], [1, 0]], True),
    ([[1, 0], [0, 2]], True),
    ([[1, 3], [0, 1]], False),
    ([[-1]], False),
])
def test_linear_monotonicity(matrix, monotone):
    assert linear_is_monotone(LinearOperator.of(matrix)) is monotone


def test_linear_operator_shape_and_apply():
    assert rotation_operator().apply((1, 2)) == (-2, 1)
    with pytest.raises(InputError):
        LinearOperator.of([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    with pytest.raises(InputError):
        linear_is_monotone(np.zeros((2, 3)))


def test_sample_sign_curve_in_a_box():
    box = HPolyhedron.box([(-1, 1), (-1, 1)])
    T = sample_graph(sign_curve(), box, 5)
    assert is_monotone(T).holds
    pairs = {(p.x[0], p.xstar[0]) for p in T.pairs}
    assert (Fraction(-1, 2), -1) in pairs
    assert (0, Fraction(1, 2)) in pairs
    assert (1, 1) in pairs


def test_sample_linear_map_over_primal_box():
    T = sample_graph(rotation_operator(), HPolyhedron.box([(0, 1), (0, 1)]), 3)
    assert len(T) == 9
    assert all(p.xstar == (-p.x[1], p.x[0]) for p in T.pairs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_sampled_graph_of_a_monotone_matrix_is_monotone(entries):
    T = LinearOperator.of([entries[:2], entries[2:]])
    box = HPolyhedron.box([(-1, 1), (-1, 1)])
    assert not linear_is_monotone(T) or is_monotone(sample_graph(T, box, 3)).holds


def test_indefinite_matrix_is_rejected_on_samples_too():
    T = LinearOperator.of([[-1, 0], [0, 1]])
    assert not linear_is_monotone(T)
    assert not is_monotone(sample_graph(T, HPolyhedron.box([(-1, 1), (-1, 1)]), 3)).holds


def test_off_graph_point_breaks_sampled_identity():
    identity = sample_graph(LinearOperator.of([[1, 0], [0, 1]]), HPolyhedron.box([(-1, 1), (-1, 1)]), 3)
    assert is_monotone(identity).holds
    stray = PrimalDualPoint.of((0, 0), (3, 0))
    check = is_monotone(FiniteOperator(identity.pairs + (stray,)))
    assert not check.holds
    assert stray in check.violation


def test_sampling_rejects_unbounded_or_missed_regions():
    with pytest.raises(InputError):
        sample_graph(identity_curve(), HPolyhedron.from_rows([([1], 1)]), 3)
    with pytest.raises(InputError):
        sample_graph(point_normal_cone(5), HPolyhedron.box([(-1, 1), (-1, 1)]), 3)
    with pytest.raises(InputError):
        sample_graph(FiniteOperator.of([(0, 0)]), HPolyhedron.box([(-1, 1)]), 3)


def test_sampling_over_y_alone_uses_the_vertical_extent():
    T = sample_graph(sign_curve(), HPolyhedron.box([(-3, 3)]), 3, vertical_count=5)
    verticals = sorted(p.xstar[0] for p in T.pairs if p.x[0] == 0)
    assert verticals == [-1, Fraction(-1, 2), 0, Fraction(1, 2), 1]
    with pytest.raises(InputError):
        sample_graph(point_normal_cone(0), HPolyhedron.box([(-1, 1)]), 3)
    line = sample_graph(point_normal_cone(0), HPolyhedron.box([(-1, 1), (-4, 4)]), 3)
    assert sorted(p.xstar[0] for p in line.pairs) == [-4, 0, 4]


def test_vertical_piece_contains():
    piece = VerticalPiece.of(0, None, 1)
    assert piece.contains(Fraction(0), Fraction(-100))
    assert not piece.contains(Fraction(0), Fraction(2))
