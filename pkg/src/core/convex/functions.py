"""
Extended-real convex functions on X x X* with X = R^n, n in {1, 2}.

Three carriers:
    GridFn        float samples on a rectangular grid, +inf as np.inf
    MaxAffineFn   max of affine pieces plus an optional region indicator (exact)
    GeneratorFn   closed convex envelope of (point, value) generators (exact)

Coordinates of a point z of X x X* are flattened as (x_1..x_n, x*_1..x*_n).
"""
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.convex.envelope import EnvelopeSolver
from src.core.convex.extended import INF, ExtReal
from src.core.convex.geometry import (
    HPolyhedron,
    NormBall,
    Region,
    VPolytope,
    convex_hull,
)
from src.utils.helpers import RatVector, dot, to_fraction, to_fraction_vector
from src.validation.error_handler import ImproperFunctionError, InputError

PRIMAL = "primal"
DUAL = "dual"


# --------------------------------------------------------------------------- #
# Points and pairing
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class PrimalDualPoint:
    """A point (x, x*) of X x X*."""
    x: RatVector
    xstar: RatVector

    def __post_init__(self):
        if len(self.x) != len(self.xstar):
            raise InputError("Primal and dual coordinates differ in dimension",
                             f"{len(self.x)} != {len(self.xstar)}")
        if len(self.x) not in (1, 2):
            raise InputError("Only n = 1 or n = 2 is supported", len(self.x))

    @classmethod
    def of(cls, x: Sequence, xstar: Sequence) -> "PrimalDualPoint":
        return cls(to_fraction_vector(x), to_fraction_vector(xstar))

    @classmethod
    def from_flat(cls, z: Sequence) -> "PrimalDualPoint":
        z = to_fraction_vector(z)
        if len(z) % 2:
            raise InputError("A point of X x X* has an even number of coordinates", len(z))
        half = len(z) // 2
        return cls(z[:half], z[half:])

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def flat(self) -> RatVector:
        return self.x + self.xstar

    def swapped(self) -> "PrimalDualPoint":
        return PrimalDualPoint(self.xstar, self.x)


def pairing(z: Union[PrimalDualPoint, Sequence]) -> Fraction:
    """<x, x*> = sum x_i x*_i."""
    if not isinstance(z, PrimalDualPoint):
        z = PrimalDualPoint.from_flat(z)
    return dot(z.x, z.xstar)


def pairing_array(nodes: np.ndarray) -> np.ndarray:
    """Row-wise pairing of an (N, 2n) float array."""
    half = nodes.shape[-1] // 2
    return np.sum(nodes[..., :half] * nodes[..., half:], axis=-1)


def swap_blocks(z: Sequence) -> tuple:
    half = len(z) // 2
    return tuple(z[half:]) + tuple(z[:half])


# --------------------------------------------------------------------------- #
# Grids
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise InputError("Grid axis needs finite lo < hi", (self.lo, self.hi))
        if self.m < 2:
            raise InputError("Grid axis needs at least two nodes", self.m)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m)

    def exact_coord(self, index: int) -> Fraction:
        lo, hi = to_fraction(self.lo), to_fraction(self.hi)
        return lo + (hi - lo) * index / (self.m - 1)

    def index_of(self, value: float, tol: float = 1e-9) -> Optional[int]:
        position = (value - self.lo) / self.spacing
        index = int(round(position))
        if 0 <= index < self.m and abs(self.coords[index] - value) <= tol * max(1.0, abs(value)):
            return index
        return None


@dataclass(frozen=True)
class GridSpec:
    """Axes of a rectangular grid; for functions on X x X* the first half is primal."""
    axes: Tuple[AxisSpec, ...]

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 4:
            raise InputError("Grids carry between 1 and 4 axes", len(self.axes))

    @classmethod
    def uniform(cls, d: int, lo: float, hi: float, m: int) -> "GridSpec":
        return cls(tuple(AxisSpec(float(lo), float(hi), int(m)) for _ in range(d)))

    @classmethod
    def symmetric(cls, d: int, window: float, m: int) -> "GridSpec":
        return cls.uniform(d, -window, window, m)

    @classmethod
    def from_triples(cls, triples: Sequence[Tuple[float, float, int]]) -> "GridSpec":
        return cls(tuple(AxisSpec(float(lo), float(hi), int(m)) for lo, hi, m in triples))

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def n(self) -> int:
        if self.d % 2:
            raise InputError("Grid on X x X* needs an even number of axes", self.d)
        return self.d // 2

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.m for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(a.spacing for a in self.axes)

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    def block_axes(self, block: str) -> Tuple[int, ...]:
        n = self.n
        return tuple(range(n)) if block == PRIMAL else tuple(range(n, 2 * n))

    def is_swappable(self) -> bool:
        n = self.n
        return self.axes[:n] == self.axes[n:]

    def swapped(self) -> "GridSpec":
        n = self.n
        return GridSpec(self.axes[n:] + self.axes[:n])

    def coords(self) -> List[np.ndarray]:
        return [a.coords for a in self.axes]

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coords(), indexing="ij"))

    def nodes(self) -> np.ndarray:
        """All nodes as an (N, d) array in C order."""
        return np.stack([g.ravel() for g in self.mesh()], axis=1)

    def exact_node(self, index: Sequence[int]) -> RatVector:
        return tuple(a.exact_coord(i) for a, i in zip(self.axes, index))

    def locate(self, point: Sequence[float], tol: float = 1e-9) -> Optional[Tuple[int, ...]]:
        index = []
        for axis, value in zip(self.axes, point):
            i = axis.index_of(float(value), tol)
            if i is None:
                return None
            index.append(i)
        return tuple(index)

    def to_dict(self) -> Dict:
        return {"axes": [{"lo": a.lo, "hi": a.hi, "m": a.m} for a in self.axes]}

    @classmethod
    def from_dict(cls, data: Dict) -> "GridSpec":
        return cls(tuple(AxisSpec(float(a["lo"]), float(a["hi"]), int(a["m"])) for a in data["axes"]))


def _axis_slices(ndim: int, direction: Sequence[int], shift: int) -> tuple:
    """Slices selecting nodes i + shift*direction for all i whose i +/- direction stay in range."""
    slices = []
    for step in direction:
        offset = shift * step
        if step == 0:
            slices.append(slice(None))
        else:
            slices.append(slice(1 + offset, (-1 + offset) or None))
    return tuple(slices)


@dataclass(frozen=True, eq=False)
class GridFn:
    """Sampled extended-real function. Values are only defined at nodes."""
    spec: GridSpec
    values: np.ndarray
    proper_flag: bool = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise InputError("Grid values do not match the grid shape", f"{values.shape} != {self.spec.shape}")
        if np.isnan(values).any():
            raise InputError("Grid values contain NaN")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        proper = bool(np.isfinite(values).any() and not np.isneginf(values).any())
        object.__setattr__(self, "proper_flag", proper)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn: Callable[..., np.ndarray]) -> "GridFn":
        """fn receives one broadcast coordinate array per axis and returns values (np.inf allowed)."""
        values = np.broadcast_to(np.asarray(fn(*spec.mesh()), dtype=float), spec.shape)
        return cls(spec, values)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def require_proper(self) -> None:
        if not self.proper_flag:
            raise ImproperFunctionError("Grid function is not proper",
                                        "all nodes are +inf" if not np.isneginf(self.values).any() else "a node is -inf")

    def value_at(self, point: Sequence, tol: float = 1e-9) -> float:
        index = self.spec.locate([float(v) for v in point], tol)
        if index is None:
            raise InputError("Point is not a grid node (grid functions are not interpolated)", tuple(point))
        return float(self.values[index])

    def is_discretely_convex(self, tol: float = 1e-9) -> bool:
        """
        Midpoint convexity on every axis and every pairwise diagonal e_i +/- e_j.

        A node whose two neighbours are finite must itself be finite and not exceed
        their average (plus tol).
        """
        d = self.spec.d
        directions = []
        for i in range(d):
            unit = [0] * d
            unit[i] = 1
            directions.append(unit)
        for i, j in itertools.combinations(range(d), 2):
            for sign in (1, -1):
                diagonal = [0] * d
                diagonal[i], diagonal[j] = 1, sign
                directions.append(diagonal)
        v = self.values
        for direction in directions:
            if any(step != 0 and m < 3 for step, m in zip(direction, self.spec.shape)):
                continue
            centre = v[_axis_slices(d, direction, 0)]
            before = v[_axis_slices(d, direction, -1)]
            after = v[_axis_slices(d, direction, 1)]
            ends = np.isfinite(before) & np.isfinite(after)
            if not ends.any():
                continue
            if not np.isfinite(centre[ends]).all():
                return False
            if (centre[ends] - 0.5 * (before[ends] + after[ends]) > tol * (1.0 + np.abs(centre[ends]))).any():
                return False
        return True


# --------------------------------------------------------------------------- #
# Exact forms
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class AffinePiece:
    """z -> slope . z + offset"""
    slope: RatVector
    offset: Fraction

    @classmethod
    def of(cls, slope: Sequence, offset: object) -> "AffinePiece":
        return cls(to_fraction_vector(slope), to_fraction(offset))

    def evaluate(self, z: Sequence[Fraction]) -> Fraction:
        return dot(self.slope, z) + self.offset


@dataclass(frozen=True)
class MaxAffineFn:
    """max_k (slope_k . z + offset_k) on the domain region, +inf off it."""
    pieces: Tuple[AffinePiece, ...]
    domain: Optional[Region] = None

    def __post_init__(self):
        if not self.pieces:
            raise InputError("MaxAffineFn needs at least one piece")
        dims = {len(p.slope) for p in self.pieces}
        if len(dims) != 1:
            raise InputError("Affine pieces of mixed dimension", sorted(dims))
        if self.domain is not None and self.domain.dim != self.dim:
            raise InputError("Domain dimension does not match the pieces", f"{self.domain.dim} != {self.dim}")
        if isinstance(self.domain, HPolyhedron) and self.domain.is_empty():
            raise InputError("MaxAffineFn domain is empty")

    @property
    def dim(self) -> int:
        return len(self.pieces[0].slope)

    def evaluate(self, z: Sequence) -> ExtReal:
        z = to_fraction_vector(z)
        if len(z) != self.dim:
            raise InputError("Point dimension mismatch", f"{len(z)} != {self.dim}")
        if self.domain is not None and not self.domain.contains(z):
            return INF
        return max(p.evaluate(z) for p in self.pieces)

    @cached_property
    def _float_pieces(self) -> Tuple[np.ndarray, np.ndarray]:
        slopes = np.array([[float(v) for v in p.slope] for p in self.pieces], dtype=float)
        offsets = np.array([float(p.offset) for p in self.pieces], dtype=float)
        return slopes, offsets

    def evaluate_array(self, nodes: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Float evaluation at an (N, d) array of points."""
        slopes, offsets = self._float_pieces
        out = np.empty(len(nodes), dtype=float)
        for start in range(0, len(nodes), chunk):
            block = nodes[start:start + chunk]
            out[start:start + chunk] = np.max(block @ slopes.T + offsets, axis=1)
        if self.domain is not None:
            inside = np.array([self.domain.contains(to_fraction_vector(p)) for p in nodes], dtype=bool)
            out[~inside] = np.inf
        return out

    def sample(self, spec: GridSpec) -> GridFn:
        if spec.d != self.dim:
            raise InputError("Grid dimension does not match the function", f"{spec.d} != {self.dim}")
        return GridFn(spec, self.evaluate_array(spec.nodes()).reshape(spec.shape))

    def pruned(self) -> "MaxAffineFn":
        """Drop pieces that never attain the max (full domain), or duplicates (restricted domain)."""
        unique = tuple(dict.fromkeys(self.pieces))
        if self.domain is not None or len(unique) == 1:
            return MaxAffineFn(unique, self.domain)
        dual = GeneratorFn(tuple((p.slope, -p.offset) for p in unique)).pruned()
        return MaxAffineFn(tuple(AffinePiece(point, -value) for point, value in dual.generators))

    def block_slope_norm_sq(self, block: str) -> Fraction:
        """max over pieces of the squared norm of the slope restricted to one block."""
        half = self.dim // 2
        part = slice(0, half) if block == PRIMAL else slice(half, self.dim)
        return max(sum(v * v for v in p.slope[part]) for p in self.pieces)


@dataclass(frozen=True)
class GeneratorFn:
    """Closed convex envelope of finitely many (point, value) generators."""
    generators: Tuple[Tuple[RatVector, Fraction], ...]

    def __post_init__(self):
        if not self.generators:
            raise InputError("GeneratorFn needs at least one generator")
        dims = {len(p) for p, _ in self.generators}
        if len(dims) != 1:
            raise InputError("Generators of mixed dimension", sorted(dims))

    @classmethod
    def of(cls, pairs: Sequence[Tuple[Sequence, object]]) -> "GeneratorFn":
        return cls(tuple((to_fraction_vector(p), to_fraction(v)) for p, v in pairs))

    @property
    def dim(self) -> int:
        return len(self.generators[0][0])

    @property
    def points(self) -> List[RatVector]:
        return [p for p, _ in self.generators]

    @cached_property
    def _solver(self) -> EnvelopeSolver:
        return EnvelopeSolver(self.points, [v for _, v in self.generators])

    def evaluate(self, z: Sequence) -> ExtReal:
        z = to_fraction_vector(z)
        if len(z) != self.dim:
            raise InputError("Point dimension mismatch", f"{len(z)} != {self.dim}")
        return self._solver.value(z)

    @cached_property
    def _bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        pts = np.array([[float(v) for v in p] for p in self.points], dtype=float)
        return pts.min(axis=0), pts.max(axis=0)

    def evaluate_array(self, nodes: np.ndarray) -> np.ndarray:
        """Float evaluation, one LP per point inside the generator bounding box."""
        lo, hi = self._bounds
        out = np.full(len(nodes), np.inf)
        inside = np.all((nodes >= lo - 1e-12) & (nodes <= hi + 1e-12), axis=1)
        for k in np.flatnonzero(inside):
            out[k] = self._solver.value_float(nodes[k])
        return out

    def sample(self, spec: GridSpec) -> GridFn:
        if spec.d != self.dim:
            raise InputError("Grid dimension does not match the function", f"{spec.d} != {self.dim}")
        return GridFn(spec, self.evaluate_array(spec.nodes()).reshape(spec.shape))

    def pruned(self) -> "GeneratorFn":
        """Drop generators lying on or above the envelope of the others."""
        kept = list(dict.fromkeys(self.generators))
        # a repeated point keeps only its smallest value
        best: Dict[RatVector, Fraction] = {}
        for point, value in kept:
            best[point] = min(value, best.get(point, value))
        kept = [(p, v) for p, v in best.items()]
        index = 0
        while index < len(kept) and len(kept) > 1:
            point, value = kept[index]
            others = kept[:index] + kept[index + 1:]
            if GeneratorFn(tuple(others)).evaluate(point) <= value:
                kept = others
            else:
                index += 1
        return GeneratorFn(tuple(kept))


# --------------------------------------------------------------------------- #
# Domain projections
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class FullSpace:
    """All of R^dim (domain of an unrestricted max-affine function)."""
    dim: int
    kind: str = field(default="fullspace", init=False)

    def contains(self, z: Sequence) -> bool:
        return True

    def bounding_box(self) -> List[Tuple[None, None]]:
        return [(None, None)] * self.dim


@dataclass(frozen=True, eq=False)
class GridSet:
    """Marked nodes of a grid (e.g. the fibers of a projected grid domain)."""
    axes: Tuple[AxisSpec, ...]
    mask: np.ndarray
    kind: str = field(default="gridset", init=False)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.axes)

    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def points(self) -> np.ndarray:
        nodes = self.spec.nodes()
        return nodes[self.mask.ravel()]

    def bounds(self) -> List[Tuple[float, float]]:
        pts = self.points()
        if len(pts) == 0:
            raise InputError("Bounds of an empty grid set")
        return [(float(pts[:, i].min()), float(pts[:, i].max())) for i in range(self.dim)]

    def max_norm(self) -> float:
        pts = self.points()
        return float(np.sqrt((pts ** 2).sum(axis=1)).max()) if len(pts) else 0.0

    def touches_window(self) -> bool:
        """True when a marked node lies on the outer face of the window."""
        for axis in range(self.dim):
            edge = np.take(self.mask, [0, -1], axis=axis)
            if edge.any():
                return True
        return False

    def contains(self, z: Sequence) -> bool:
        index = self.spec.locate([float(v) for v in z])
        return index is not None and bool(self.mask[index])

    def hull(self) -> VPolytope:
        pts = self.points()
        if len(pts) == 0:
            raise InputError("Hull of an empty grid set")
        return convex_hull([to_fraction_vector(p) for p in pts])


DomainSet = Union[GridSet, HPolyhedron, VPolytope, NormBall, FullSpace]


def _block_indices(dim: int, block: str) -> List[int]:
    if block not in (PRIMAL, DUAL):
        raise InputError("Block must be 'primal' or 'dual'", block)
    half = dim // 2
    return list(range(half)) if block == PRIMAL else list(range(half, dim))


def project_domain(h: Union[GridFn, MaxAffineFn, GeneratorFn], block: str) -> DomainSet:
    """P1 (primal) or P2 (dual) projection of the effective domain of h."""
    if isinstance(h, GridFn):
        h.require_proper()
        axes = _block_indices(h.spec.d, block)
        other = tuple(i for i in range(h.spec.d) if i not in axes)
        mask = h.finite_mask.any(axis=other) if other else h.finite_mask
        return GridSet(tuple(h.spec.axes[i] for i in axes), mask)
    if isinstance(h, MaxAffineFn):
        axes = _block_indices(h.dim, block)
        domain = h.domain
        if domain is None:
            return FullSpace(len(axes))
        if isinstance(domain, NormBall):
            return NormBall(tuple(domain.center[i] for i in axes), domain.radius)
        return domain.project(axes)
    if isinstance(h, GeneratorFn):
        axes = _block_indices(h.dim, block)
        return convex_hull([tuple(p[i] for i in axes) for p in h.points])
    raise InputError("Unsupported function representation", type(h).__name__)
