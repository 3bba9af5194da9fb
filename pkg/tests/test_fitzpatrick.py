from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.convex.extended import INF
from src.core.convex.functions import PRIMAL, GridFn, GridSpec, MaxAffineFn, GeneratorFn
from src.core.fitzpatrick import (
    family_membership,
    jdelta_pwl1d_eval,
    minimality_maximality_envelope,
    phi_finite,
    phi_linear_eval,
    phi_pwl1d_eval,
    phi_pwl1d_grid,
    sigma_finite,
    sigma_linear_domain,
    sigma_linear_eval,
)
from src.core.legendre.transform import ConjugateResult, j_transform
from src.core.lemmas import lipschitz_profile
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    PwlCurve1d,
    SlopedPiece,
    identity_curve,
    rotation_operator,
    sign_curve,
)
from src.validation.error_handler import InputError, PreconditionError, UnsupportedRepresentationError

LATTICE = [tuple(Fraction(v, 2) for v in z) for z in product(range(-3, 4), repeat=2)]


@pytest.mark.parametrize("z", [(1, 3), (Fraction(1, 2), 0), (-2, Fraction(1, 3)), (0, 0)])
def test_identity_phi_is_quarter_square_of_sum(z):
    x, xs = (Fraction(v) for v in z)
    expected = (x + xs) ** 2 / 4
    assert phi_pwl1d_eval(identity_curve(), z) == expected
    assert phi_linear_eval(LinearOperator.of([[1]]), z) == expected


def test_sign_phi_values():
    T = sign_curve()
    # on the graph phi equals the pairing
    assert phi_pwl1d_eval(T, (0, Fraction(1, 2))) == 0
    assert phi_pwl1d_eval(T, (2, 1)) == 2
    # x* outside [-1, 1] sends the sup along a ray
    assert phi_pwl1d_eval(T, (0, 2)) == INF


def test_phi_needs_a_maximal_curve():
    with pytest.raises(InputError):
        phi_pwl1d_eval(PwlCurve1d((SlopedPiece.of(-1, 1, 1, 0),)), (0, 0))


def test_graph_indicator_j_transform():
    T = sign_curve()
    assert jdelta_pwl1d_eval(T, (0, 0)) == 0
    assert jdelta_pwl1d_eval(T, (1, 0)) == 1
    assert jdelta_pwl1d_eval(T, (0, 1)) == INF


def test_rotation_phi_and_sigma_live_on_the_graph():
    T = rotation_operator()
    assert phi_linear_eval(T, (1, 2, -2, 1)) == 0
    assert phi_linear_eval(T, (1, 2, 0, 0)) == INF
    assert sigma_linear_eval(T, (1, 2, -2, 1)) == 0
    assert sigma_linear_eval(T, (1, 2, 0, 0)) == INF
    assert sigma_linear_eval(LinearOperator.of([[1]]), (2, 2)) == 4


def test_finite_constructions(diagonal_pair):
    phi = phi_finite(diagonal_pair)
    sigma = sigma_finite(diagonal_pair)
    assert isinstance(phi, MaxAffineFn) and len(phi.pieces) == 2
    assert isinstance(sigma, GeneratorFn) and len(sigma.generators) == 2
    assert phi.evaluate((2, 3)) == 4
    assert phi.evaluate((1, 1)) == 1
    assert sigma.evaluate((Fraction(1, 2), Fraction(1, 2))) == Fraction(1, 2)
    assert sigma.evaluate((0, 1)) == INF


def test_empty_finite_operator_is_rejected():
    with pytest.raises(InputError):
        phi_finite(FiniteOperator(()))
    with pytest.raises(InputError):
        sigma_finite(FiniteOperator(()))


def test_phi_grid_matches_closed_form():
    spec = GridSpec.symmetric(2, 1.0, 5)
    grid = phi_pwl1d_grid(identity_curve(), spec)
    expected = GridFn.from_callable(spec, lambda x, xs: (x + xs) ** 2 / 4)
    np.testing.assert_allclose(grid.values, expected.values)


def test_envelope_on_a_two_point_operator(diagonal_pair):
    report = minimality_maximality_envelope(diagonal_pair, LATTICE)
    assert report.holds
    assert report.phi_le_sigma and report.phi_eq_jsigma
    assert report.probes == len(LATTICE)
    assert report.worst_gap <= 0


def test_envelope_rejects_non_monotone_input():
    with pytest.raises(PreconditionError) as excinfo:
        minimality_maximality_envelope(FiniteOperator.of([(0, 1), (1, 0)]), LATTICE)
    assert excinfo.value.details is not None


def test_sigma_belongs_to_the_family(diagonal_pair):
    checks = [(Fraction(1, 2), Fraction(1, 2)), (0, 1), (3, 3)]
    report = family_membership(sigma_finite(diagonal_pair), diagonal_pair.pairs, checks)
    assert report.is_member
    assert report.points_checked == 5


def test_quadratic_grid_belongs_to_the_identity_family(square_grid):
    graph = [(0, 0), (1, 1), (Fraction(-3, 2), Fraction(-3, 2))]
    checks = [(1, -1), (Fraction(1, 4), 2), (-2, -2)]
    report = family_membership(square_grid, graph, checks)
    assert report.is_member
    assert report.max_graph_gap == pytest.approx(0.0)


def test_membership_reports_points_below_pairing():
    report = family_membership(lambda z: Fraction(0), [(1, 1)], [(2, 2)])
    assert not report.is_member
    assert report.max_deficit_below_pi == pytest.approx(4.0)
    assert report.witnesses[0][0] == "below_pi"


def test_pairing_samples_are_not_a_representation():
    spec = GridSpec.symmetric(2, 1.0, 5)
    with pytest.raises(UnsupportedRepresentationError):
        family_membership(GridFn.from_callable(spec, lambda x, xs: x * xs), [], [(0, 0)])


def test_linear_sigma_domain_is_the_graph():
    domain = sigma_linear_domain(rotation_operator())
    assert domain.dim == 4
    assert domain.contains((1, 2, -2, 1))
    assert not domain.contains((1, 2, -2, 0))


# --------------------------------------------------------------------------- #
# Sampled operators
# --------------------------------------------------------------------------- #

IDENTITY_SAMPLES = FiniteOperator.of([(Fraction(k, 10), Fraction(k, 10)) for k in range(-50, 51)])
window = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@settings(max_examples=40, deadline=None)
@given(window, window)
def test_sampled_identity_phi_is_within_a_grid_step_of_the_quarter_square(x, xs):
    u = (x + xs) / 2
    gap = u ** 2 - phi_finite(IDENTITY_SAMPLES).evaluate((x, xs))
    assert 0 <= gap <= Fraction(1, 400)


def test_sampled_identity_sigma_is_the_square_on_the_diagonal():
    sigma = sigma_finite(IDENTITY_SAMPLES)
    for pair in IDENTITY_SAMPLES.pairs[::10]:
        y = pair.x[0]
        assert sigma.evaluate((y, y)) == y ** 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=6, unique=True))
def test_bounded_range_keeps_phi_slopes_in_the_ball(ys):
    clipped = [tuple(max(-1, min(1, v)) for v in y) for y in ys]
    T = FiniteOperator.of(list(zip(ys, clipped)))
    phi = phi_finite(T)
    largest = max(sum(v * v for v in ystar) for ystar in clipped)
    assert phi.block_slope_norm_sq(PRIMAL) == largest <= 2
    assert lipschitz_profile(ConjugateResult(phi), PRIMAL, 2).holds


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=6, unique=True),
       st.tuples(window, window))
def test_phi_is_the_j_transform_of_sigma(pairs, z):
    T = FiniteOperator.of(pairs)
    assert phi_finite(T).evaluate(z) == j_transform(sigma_finite(T)).function.evaluate(z)
