from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.convex.exact import det, rank, simplex_min, solve
from src.core.convex.extended import INF, NEG_INF, ext_add, ext_scale, is_finite
from src.core.convex.functions import (
    DUAL,
    PRIMAL,
    FullSpace,
    GeneratorFn,
    GridFn,
    GridSpec,
    MaxAffineFn,
    AffinePiece,
    pairing,
    project_domain,
    swap_blocks,
)
from src.core.convex.geometry import (
    ConvexHull,
    HPolyhedron,
    NormBall,
    VPolytope,
    convex_hull,
    indicator_eval,
    recession_cone,
    support_function,
)
from src.utils.helpers import to_fraction
from src.validation.error_handler import ImproperFunctionError, InputError, UnsupportedDimensionError

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=8)


# --------------------------------------------------------------------------- #
# Numbers
# --------------------------------------------------------------------------- #

@pytest.mark.parametrize("raw, expected", [
    (0.6, Fraction(3, 5)),
    ("3/5", Fraction(3, 5)),
    ("0.125", Fraction(1, 8)),
    (2, Fraction(2)),
    (np.float64(0.25), Fraction(1, 4)),
])
def test_to_fraction_reads_decimals_exactly(raw, expected):
    assert to_fraction(raw) == expected


@pytest.mark.parametrize("raw", [True, float("inf"), "abc", "1/0"])
def test_to_fraction_rejects(raw):
    with pytest.raises(InputError):
        to_fraction(raw)


def test_extended_arithmetic():
    assert ext_add(Fraction(1), INF) == INF
    assert ext_add(NEG_INF, Fraction(3)) == NEG_INF
    assert ext_scale(Fraction(0), INF) == 0
    assert not is_finite(INF)
    assert is_finite(Fraction(7))
    with pytest.raises(InputError):
        ext_add(INF, NEG_INF)
    with pytest.raises(InputError):
        ext_scale(Fraction(-1), Fraction(1))


def test_exact_linear_algebra():
    assert rank([[1, 2], [2, 4]]) == 1
    assert solve([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(-1)]], [Fraction(2), Fraction(0)]) == [1, 1]
    assert solve([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], [Fraction(1), Fraction(1)]) is None
    assert det([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]) == -1


def test_rational_simplex():
    value, x = simplex_min([1, 2, 0], [[1, 1, 1]], [1])
    assert value == 0 and x == [0, 0, 1]
    value, x = simplex_min([1, 2], [[1, 1], [2, 2]], [3, 6])
    assert value == 3 and x == [3, 0]
    assert simplex_min([1, 1], [[1, 1]], [-1]) is None
    with pytest.raises(ValueError):
        simplex_min([-1, 0], [[1, -1]], [0])


# --------------------------------------------------------------------------- #
# Regions and hulls
# --------------------------------------------------------------------------- #

def test_box_membership_and_projection():
    triangle = HPolyhedron.from_rows([([-1, 0], 0), ([0, -1], 0), ([1, 1], 1)])
    assert triangle.contains((Fraction(1, 2), Fraction(1, 2)))
    assert not triangle.contains((1, 1))
    assert triangle.axis_bounds(0) == (0, 1)
    assert triangle.project([1]).bounding_box() == [(0, 1)]


def test_empty_polyhedron_detected():
    empty = HPolyhedron.from_rows([([1], 0), ([-1], -1)])
    assert empty.is_empty()
    with pytest.raises(InputError):
        recession_cone(empty)


def test_recession_cone_of_halfplane():
    cone = recession_cone(HPolyhedron.from_rows([([0, 1], 1)]))
    assert cone.contains((5, -3))
    assert not cone.contains((0, 1))


def test_square_hull_drops_interior_point():
    hull = convex_hull([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0)])
    assert sorted(hull.vertices) == [(0, 0), (0, 2), (2, 0), (2, 2)]
    assert hull.contains((Fraction(1, 2), Fraction(3, 2)))
    assert not hull.contains((3, 1))


def test_tetrahedron_hull_in_space():
    points = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (Fraction(1, 5), Fraction(1, 5), Fraction(1, 5))]
    hull = ConvexHull(points)
    assert len(hull.vertices) == 4
    assert hull.contains((Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)))
    assert not hull.contains((1, 1, 1))


def test_flat_hull_lives_in_its_affine_span():
    segment = ConvexHull([(0, 0, 0), (1, 1, 1), (2, 2, 2)])
    assert sorted(segment.vertices) == [(0, 0, 0), (2, 2, 2)]
    assert segment.contains((1, 1, 1))
    assert not segment.contains((1, 1, 0))


def test_hull_dimension_limit():
    with pytest.raises(UnsupportedDimensionError):
        ConvexHull([(0, 0, 0, 0), (1, 0, 0, 0)])


def test_vpolytope_membership_in_four_dimensions():
    cube = VPolytope.from_points([tuple(int(b) for b in format(k, "04b")) for k in range(16)])
    assert cube.contains((Fraction(1, 2),) * 4)
    assert not cube.contains((2, 0, 0, 0))


def test_support_function_and_ball():
    polytope = VPolytope.from_points([(0, 0), (1, 2)])
    assert support_function(polytope, (1, 1)) == 3
    ball = NormBall.of((0, 0), 1)
    assert ball.contains((Fraction(3, 5), Fraction(4, 5)))
    assert not ball.contains((1, 1))
    assert indicator_eval(ball, ("3/5", "4/5")) == 0
    assert indicator_eval(ball, (1, 1)) == INF


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _inside_others(p, points):
    """Brute force: p lies on a segment or in a triangle spanned by the other points."""
    others = [q for q in points if q != p]
    for a, b in combinations(others, 2):
        if _cross(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) \
                and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]):
            return True
    for a, b, c in combinations(others, 3):
        if _cross(a, b, c) == 0:
            continue
        signs = {np.sign(_cross(a, b, p)), np.sign(_cross(b, c, p)), np.sign(_cross(c, a, p))}
        if not {-1, 1} <= signs:
            return True
    return False


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=9, unique=True))
def test_hull_vertices_match_brute_force(points):
    hull = convex_hull(points)
    assert sorted(hull.vertices) == sorted(p for p in points if not _inside_others(p, points))
    assert all(hull.contains(p) for p in points)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 3)), min_size=1, max_size=5),
       st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_recession_directions_never_leave_the_region(rows, direction):
    # every right-hand side is nonnegative, so the origin is in the region
    region = HPolyhedron.from_rows([((a, b), c) for a, b, c in rows])
    if recession_cone(region).contains(direction):
        for step in (0, 1, 7, 1000):
            assert indicator_eval(region, tuple(step * u for u in direction)) == 0
    else:
        assert any(a * direction[0] + b * direction[1] > 0 for a, b, _ in rows)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(rationals, rationals), min_size=1, max_size=6),
       st.tuples(rationals, rationals), st.tuples(rationals, rationals),
       st.fractions(min_value=0, max_value=5, max_denominator=4))
def test_support_function_is_sublinear(points, s, t, scale):
    polytope = VPolytope.from_points(points)
    total = tuple(a + b for a, b in zip(s, t))
    assert support_function(polytope, total) <= support_function(polytope, s) + support_function(polytope, t)
    assert support_function(polytope, tuple(scale * v for v in s)) == scale * support_function(polytope, s)


# --------------------------------------------------------------------------- #
# Grids
# --------------------------------------------------------------------------- #

def test_grid_spec_nodes_and_exact_coordinates():
    spec = GridSpec.symmetric(2, 2.0, 5)
    assert spec.shape == (5, 5)
    assert spec.max_spacing == 1.0
    assert spec.nodes().shape == (25, 2)
    assert spec.exact_node((0, 4)) == (-2, 2)
    assert spec.locate((1.0, -1.0)) == (3, 1)
    assert spec.locate((0.5, 0.0)) is None
    assert spec.is_swappable()


def test_grid_rejects_bad_axes():
    with pytest.raises(InputError):
        GridSpec.uniform(1, 1.0, 0.0, 5)
    with pytest.raises(InputError):
        GridSpec.uniform(1, 0.0, 1.0, 1)


def test_discrete_convexity(square_grid):
    assert square_grid.is_discretely_convex()
    concave = GridFn(square_grid.spec, -square_grid.values)
    assert not concave.is_discretely_convex()


def test_improper_grid():
    spec = GridSpec.symmetric(1, 1.0, 3)
    with pytest.raises(ImproperFunctionError):
        GridFn(spec, np.full(3, np.inf)).require_proper()


def test_grid_domain_projection():
    spec = GridSpec.symmetric(2, 2.0, 9)
    band = GridFn.from_callable(spec, lambda x, xs: np.where(np.abs(xs) <= 1.0, np.abs(x), np.inf))
    dual = project_domain(band, DUAL)
    assert dual.max_norm() == 1.0
    assert not dual.touches_window()
    assert project_domain(band, PRIMAL).touches_window()


# --------------------------------------------------------------------------- #
# Exact forms
# --------------------------------------------------------------------------- #

def test_max_affine_with_domain():
    absolute = MaxAffineFn((AffinePiece.of([1], 0), AffinePiece.of([-1], 0)))
    assert absolute.evaluate((-3,)) == 3
    restricted = MaxAffineFn(absolute.pieces, HPolyhedron.box([(-1, 1)]))
    assert restricted.evaluate((2,)) == INF
    assert isinstance(project_domain(MaxAffineFn((AffinePiece.of([1, 1], 0),)), PRIMAL), FullSpace)


def test_generator_envelope_is_exact():
    line = GeneratorFn.of([((0,), 0), ((2,), 4)])
    assert line.evaluate((1,)) == 2
    assert line.evaluate((3,)) == INF
    plane = GeneratorFn.of([((0, 0), 0), ((1, 0), 1), ((0, 1), 1), ((1, 1), 2)])
    assert plane.evaluate((Fraction(1, 2), Fraction(1, 3))) == Fraction(5, 6)


def test_envelope_next_to_a_vertex_in_four_dimensions(rng):
    # the origin is a vertex: every other generator lies in the closed positive orthant
    unit = [tuple(int(i == j) for j in range(4)) for i in range(4)]
    extra = [tuple(int(v) for v in row) for row in rng.integers(1, 6, size=(35, 4))]
    points = [(0, 0, 0, 0)] + unit + extra
    f = GeneratorFn.of([(p, sum(p)) for p in points])
    tiny = Fraction(1, 10 ** 12)
    assert f.evaluate((-tiny,) * 4) == INF
    assert f.evaluate((tiny,) * 4) == 4 * tiny
    assert f.evaluate((Fraction(1, 8),) * 4) == Fraction(1, 2)
    polytope = VPolytope.from_points(points)
    assert not polytope.contains((-tiny, 0, 0, 0))
    assert polytope.contains((tiny, 0, 0, 0))


def test_generator_pruning_drops_points_above_the_envelope():
    f = GeneratorFn.of([((0,), 0), ((1,), 5), ((2,), 0)])
    assert [p for p, _ in f.pruned().generators] == [(0,), (2,)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(rationals, rationals), min_size=2, max_size=6, unique_by=lambda g: g[0]))
def test_generator_envelope_lies_below_generators_and_is_midpoint_convex(generators):
    f = GeneratorFn.of([((p,), v) for p, v in generators])
    for p, v in generators:
        assert f.evaluate((p,)) <= v
    points = sorted(p for p, _ in generators)
    a, b = points[0], points[-1]
    mid = (a + b) / 2
    assert f.evaluate((mid,)) <= (f.evaluate((a,)) + f.evaluate((b,))) / 2


def test_pairing_and_block_swap():
    assert pairing((1, 2, 3, 4)) == 11
    assert swap_blocks((1, 2, 3, 4)) == (3, 4, 1, 2)
    with pytest.raises(InputError):
        pairing((1, 2, 3))
