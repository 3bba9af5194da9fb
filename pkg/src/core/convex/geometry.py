"""
Regions of R^d and the exact polyhedral routines built on them.

All predicates run in rational arithmetic. Projection of H-polyhedra is by
Fourier-Motzkin elimination, which is adequate for the at most four coordinates a
point of X x X* carries here.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.core.convex.envelope import EnvelopeSolver
from src.core.convex.exact import AffineFrame, rank, sub
from src.core.convex.extended import INF, ExtReal
from src.utils.helpers import RatVector, dot, to_fraction, to_fraction_vector
from src.validation.error_handler import InputError, UnsupportedDimensionError

Bound = Optional[Fraction]

HULL_DIMENSION_LIMIT = 3


# --------------------------------------------------------------------------- #
# Fourier-Motzkin elimination
# --------------------------------------------------------------------------- #

Row = Tuple[RatVector, Fraction]


def _normalize(row: Row) -> Optional[Row]:
    """Scale a.z <= b so that max|a_i| = 1; trivial rows 0 <= b (b >= 0) vanish."""
    a, b = row
    scale = max((abs(v) for v in a), default=Fraction(0))
    if scale == 0:
        return None if b >= 0 else row
    return tuple(v / scale for v in a), b / scale


def _dedupe(rows: Sequence[Row]) -> List[Row]:
    tightest: Dict[RatVector, Fraction] = {}
    order: List[RatVector] = []
    for row in rows:
        normalized = _normalize(row)
        if normalized is None:
            continue
        a, b = normalized
        if a not in tightest:
            order.append(a)
            tightest[a] = b
        elif b < tightest[a]:
            tightest[a] = b
    return [(a, tightest[a]) for a in order]


def eliminate(rows: Sequence[Row], var: int) -> List[Row]:
    """
    Eliminate one variable from a system of rows a.z <= b.

    Args:
        rows: inequalities over d variables
        var: index of the variable to project out

    Returns:
        inequalities over the remaining d-1 variables (same order, `var` removed)
    """
    zero, positive, negative = [], [], []
    for a, b in rows:
        if a[var] == 0:
            zero.append((a, b))
        elif a[var] > 0:
            positive.append((a, b))
        else:
            negative.append((a, b))

    def drop(a: Sequence[Fraction]) -> RatVector:
        return tuple(v for i, v in enumerate(a) if i != var)

    result: List[Row] = [(drop(a), b) for a, b in zero]
    for ap, bp in positive:
        for an, bn in negative:
            cp, cn = ap[var], -an[var]
            combined = tuple(x / cp + y / cn for x, y in zip(ap, an))
            result.append((drop(combined), bp / cp + bn / cn))
    return _dedupe(result)


def is_feasible(rows: Sequence[Row], dim: int) -> bool:
    current = _dedupe(rows)
    for _ in range(dim):
        current = eliminate(current, 0)
    return all(b >= 0 for _, b in current)


# --------------------------------------------------------------------------- #
# Regions
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class HalfSpace:
    """The set {z : a.z <= b}."""
    a: RatVector
    b: Fraction

    def contains(self, z: Sequence[Fraction]) -> bool:
        return dot(self.a, z) <= self.b


@dataclass(frozen=True)
class HPolyhedron:
    halfspaces: Tuple[HalfSpace, ...]
    dim: int
    kind: str = field(default="hpolyhedron", init=False)

    def __post_init__(self):
        for h in self.halfspaces:
            if len(h.a) != self.dim:
                raise InputError("Half-space dimension mismatch", f"{len(h.a)} != {self.dim}")

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[Sequence, object]], dim: Optional[int] = None) -> "HPolyhedron":
        halfspaces = tuple(HalfSpace(to_fraction_vector(a), to_fraction(b)) for a, b in rows)
        if dim is None:
            if not halfspaces:
                raise InputError("Dimension required for an empty half-space list")
            dim = len(halfspaces[0].a)
        return cls(halfspaces, dim)

    @classmethod
    def box(cls, bounds: Sequence[Tuple[object, object]]) -> "HPolyhedron":
        rows = []
        d = len(bounds)
        for i, (lo, hi) in enumerate(bounds):
            unit = [0] * d
            unit[i] = 1
            rows.append((unit, hi))
            rows.append(([-v for v in unit], -to_fraction(lo)))
        return cls.from_rows(rows, d)

    @property
    def rows(self) -> List[Row]:
        return [(h.a, h.b) for h in self.halfspaces]

    def contains(self, z: Sequence[Fraction]) -> bool:
        z = to_fraction_vector(z)
        if len(z) != self.dim:
            raise InputError("Point dimension mismatch", f"{len(z)} != {self.dim}")
        return all(h.contains(z) for h in self.halfspaces)

    def is_empty(self) -> bool:
        return not is_feasible(self.rows, self.dim)

    def project(self, axes: Sequence[int]) -> "HPolyhedron":
        """Projection onto the listed coordinates, in the listed order."""
        rows = _dedupe(self.rows)
        keep = list(axes)
        # eliminate the complement from the highest index down so indices stay valid
        for var in sorted(set(range(self.dim)) - set(keep), reverse=True):
            rows = eliminate(rows, var)
        remaining = sorted(keep)
        order = [remaining.index(a) for a in keep]
        rows = [(tuple(a[i] for i in order), b) for a, b in rows]
        return HPolyhedron(tuple(HalfSpace(a, b) for a, b in rows), len(keep))

    def axis_bounds(self, axis: int) -> Tuple[Bound, Bound]:
        lo: Bound = None
        hi: Bound = None
        for h in self.project([axis]).halfspaces:
            coefficient = h.a[0]
            if coefficient > 0:
                value = h.b / coefficient
                hi = value if hi is None else min(hi, value)
            elif coefficient < 0:
                value = h.b / coefficient
                lo = value if lo is None else max(lo, value)
        return lo, hi

    def bounding_box(self) -> List[Tuple[Bound, Bound]]:
        return [self.axis_bounds(i) for i in range(self.dim)]


@dataclass(frozen=True)
class VPolytope:
    vertices: Tuple[RatVector, ...]
    dim: int
    kind: str = field(default="vpolytope", init=False)

    def __post_init__(self):
        if not self.vertices:
            raise InputError("VPolytope needs at least one vertex")
        for v in self.vertices:
            if len(v) != self.dim:
                raise InputError("Vertex dimension mismatch", f"{len(v)} != {self.dim}")

    @classmethod
    def from_points(cls, points: Sequence[Sequence]) -> "VPolytope":
        vertices = tuple(to_fraction_vector(p) for p in points)
        if not vertices:
            raise InputError("VPolytope needs at least one vertex")
        return cls(vertices, len(vertices[0]))

    @cached_property
    def _membership(self):
        if self.dim <= HULL_DIMENSION_LIMIT:
            return ConvexHull(self.vertices)
        return EnvelopeSolver(self.vertices, [Fraction(0)] * len(self.vertices))

    def contains(self, z: Sequence[Fraction]) -> bool:
        z = to_fraction_vector(z)
        if len(z) != self.dim:
            raise InputError("Point dimension mismatch", f"{len(z)} != {self.dim}")
        return self._membership.contains(z)

    def bounding_box(self) -> List[Tuple[Fraction, Fraction]]:
        return [(min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
                for i in range(self.dim)]

    def project(self, axes: Sequence[int]) -> "VPolytope":
        projected = {tuple(v[i] for i in axes) for v in self.vertices}
        return convex_hull(sorted(projected)) if len(axes) <= HULL_DIMENSION_LIMIT \
            else VPolytope(tuple(sorted(projected)), len(axes))


@dataclass(frozen=True)
class NormBall:
    """Closed Euclidean ball ||z - center|| <= radius."""
    center: RatVector
    radius: Fraction
    kind: str = field(default="normball", init=False)

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("NormBall radius must be nonnegative", self.radius)

    @classmethod
    def of(cls, center: Sequence, radius: object) -> "NormBall":
        return cls(to_fraction_vector(center), to_fraction(radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, z: Sequence[Fraction]) -> bool:
        z = to_fraction_vector(z)
        if len(z) != self.dim:
            raise InputError("Point dimension mismatch", f"{len(z)} != {self.dim}")
        return sum((a - c) ** 2 for a, c in zip(z, self.center)) <= self.radius ** 2

    def bounding_box(self) -> List[Tuple[Fraction, Fraction]]:
        return [(c - self.radius, c + self.radius) for c in self.center]


Region = Union[HPolyhedron, VPolytope, NormBall]


def indicator_eval(region: Region, z: Sequence) -> ExtReal:
    """0 on the region, +inf off it."""
    return Fraction(0) if region.contains(to_fraction_vector(z)) else INF


def support_function(region: VPolytope, s: Sequence) -> Fraction:
    """max over vertices of s.v (attained at a vertex of the polytope)."""
    s = to_fraction_vector(s)
    if len(s) != region.dim:
        raise InputError("Direction dimension mismatch", f"{len(s)} != {region.dim}")
    return max(dot(s, v) for v in region.vertices)


def recession_cone(region: HPolyhedron) -> HPolyhedron:
    """{u : a.u <= 0 for every half-space (a, b)}; requires a nonempty polyhedron."""
    if region.is_empty():
        raise InputError("Recession cone of an empty polyhedron is undefined")
    return HPolyhedron(tuple(HalfSpace(h.a, Fraction(0)) for h in region.halfspaces), region.dim)


def bounding_box(region: Region) -> List[Tuple[Bound, Bound]]:
    return region.bounding_box()


# --------------------------------------------------------------------------- #
# Exact convex hull, d <= 3
# --------------------------------------------------------------------------- #

def _cross2(o: Sequence[Fraction], a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _cross3(u: Sequence[Fraction], v: Sequence[Fraction]) -> List[Fraction]:
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def _orient3(a, b, c, d) -> Fraction:
    """Signed volume of (b-a, c-a, d-a); negative when d lies below the oriented face abc."""
    return dot(_cross3(sub(b, a), sub(c, a)), sub(d, a))


class ConvexHull:
    """
    Exact hull of a point set of affine dimension <= 3.

    Points are mapped to intrinsic coordinates of their affine hull; the hull is built
    there (interval, monotone chain, or incremental triangulated surface) and kept as
    inequalities n.t <= c for membership queries.
    """

    def __init__(self, points: Sequence[Sequence]):
        unique = sorted({to_fraction_vector(p) for p in points})
        if not unique:
            raise InputError("Convex hull of an empty set")
        dims = {len(p) for p in unique}
        if len(dims) != 1:
            raise InputError("Points of mixed dimension")
        self.dim = dims.pop()
        if self.dim > HULL_DIMENSION_LIMIT:
            raise UnsupportedDimensionError(self.dim, HULL_DIMENSION_LIMIT)
        self.points = unique
        self.frame = AffineFrame(unique)
        self.coords = [self.frame.coordinates(p) for p in unique]
        self.inequalities: List[Tuple[List[Fraction], Fraction]] = []
        builders = {0: self._build_point, 1: self._build_interval,
                    2: self._build_polygon, 3: self._build_polyhedron}
        self.vertex_indices = builders[self.frame.dim]()

    @property
    def vertices(self) -> List[RatVector]:
        return [self.points[i] for i in self.vertex_indices]

    def contains(self, z: Sequence[Fraction]) -> bool:
        t = self.frame.coordinates(list(z))
        if t is None:
            return False
        return all(dot(n, t) <= c for n, c in self.inequalities)

    def _build_point(self) -> List[int]:
        return [0]

    def _build_interval(self) -> List[int]:
        values = [t[0] for t in self.coords]
        lo = min(range(len(values)), key=lambda i: values[i])
        hi = max(range(len(values)), key=lambda i: values[i])
        self.inequalities = [([Fraction(-1)], -values[lo]), ([Fraction(1)], values[hi])]
        return sorted({lo, hi})

    def _build_polygon(self) -> List[int]:
        order = sorted(range(len(self.coords)), key=lambda i: tuple(self.coords[i]))
        pts = self.coords

        def chain(indices):
            hull: List[int] = []
            for i in indices:
                while len(hull) > 1 and _cross2(pts[hull[-2]], pts[hull[-1]], pts[i]) <= 0:
                    hull.pop()
                hull.append(i)
            return hull

        lower = chain(order)
        upper = chain(reversed(order))
        ring = lower[:-1] + upper[:-1]
        for k, i in enumerate(ring):
            p, q = pts[i], pts[ring[(k + 1) % len(ring)]]
            normal = [q[1] - p[1], p[0] - q[0]]
            self.inequalities.append((normal, dot(normal, p)))
        return sorted(ring)

    def _build_polyhedron(self) -> List[int]:
        pts = self.coords
        seed = list(self.frame.basis[:4])
        interior = [sum(pts[i][k] for i in seed) / 4 for k in range(3)]
        faces: List[Tuple[int, int, int]] = []
        for skip in range(4):
            a, b, c = [seed[i] for i in range(4) if i != skip]
            if _orient3(pts[a], pts[b], pts[c], interior) > 0:
                b, c = c, b
            faces.append((a, b, c))

        for p in range(len(pts)):
            if p in seed:
                continue
            visible = [f for f in faces if _orient3(pts[f[0]], pts[f[1]], pts[f[2]], pts[p]) > 0]
            if not visible:
                continue
            edges = set()
            for a, b, c in visible:
                edges.update({(a, b), (b, c), (c, a)})
            horizon = [(u, v) for (u, v) in edges if (v, u) not in edges]
            faces = [f for f in faces if f not in visible]
            faces.extend((u, v, p) for u, v in horizon)

        incident: Dict[int, List[List[Fraction]]] = {}
        for a, b, c in faces:
            normal = _cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]))
            self.inequalities.append((normal, dot(normal, pts[a])))
            for i in (a, b, c):
                incident.setdefault(i, []).append(normal)
        return sorted(i for i, normals in incident.items() if rank(normals) == 3)


def convex_hull(points: Sequence[Sequence]) -> VPolytope:
    """Vertex list of conv(points) for d <= 3, exact."""
    if len(points) == 0:
        raise InputError("Convex hull of an empty set")
    hull = ConvexHull(points)
    return VPolytope(tuple(hull.vertices), hull.dim)
