"""
Fenchel conjugation on grids and in exact form, and the J transform.

Grid conjugates are exact for the function restricted to its nodes:

    f*(s) = max over nodes z of  s.z - f(z)

`conjugate_bruteforce` evaluates this directly and is the reference. `conjugate_grid`
computes the same numbers one axis at a time with a linear-time 1-D transform
(lower hull of the samples, then a sweep over sorted slopes):

    f*(s_1..s_d) = max_{z_1} s_1 z_1 + max_{z_2} s_2 z_2 + ... - f(z)

Both report a saturation mask: dual nodes whose maximizer sits on the outer face of
the primal window, where the grid value need not match the analytic conjugate.
"""
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from src.core.convex.functions import (
    AffinePiece,
    AxisSpec,
    GeneratorFn,
    GridFn,
    GridSpec,
    MaxAffineFn,
    swap_blocks,
)
from src.utils.logging import logger
from src.validation.error_handler import InputError, UnsupportedRepresentationError

ExactFn = Union[MaxAffineFn, GeneratorFn]
AnyFn = Union[GridFn, MaxAffineFn, GeneratorFn]

# upper bound on dual-nodes x primal-nodes entries materialised per brute-force chunk
_BRUTEFORCE_BLOCK = 4_000_000

METHODS = ("llt", "bruteforce", "exact")


@dataclass(frozen=True, eq=False)
class ConjugateResult:
    function: AnyFn
    saturation_mask: Optional[np.ndarray] = None

    @property
    def trusted(self) -> Optional[np.ndarray]:
        """Nodes where the grid conjugate is claimed to be accurate (grid results only)."""
        if self.saturation_mask is None:
            return None
        return ~self.saturation_mask


# --------------------------------------------------------------------------- #
# Grids
# --------------------------------------------------------------------------- #

def default_dual_spec(f: GridFn) -> GridSpec:
    """
    Per axis [-L, L] with L the largest finite-difference slope of f along that axis,
    and as many nodes as the primal axis.
    """
    axes = []
    for axis, spec in enumerate(f.spec.axes):
        values = f.values
        if spec.m < 2:
            slope = 0.0
        else:
            left = np.take(values, range(0, spec.m - 1), axis=axis)
            right = np.take(values, range(1, spec.m), axis=axis)
            both = np.isfinite(left) & np.isfinite(right)
            slope = float(np.max(np.abs(right[both] - left[both]))) / spec.spacing if both.any() else 0.0
        reach = slope if slope > 0 else 1.0
        axes.append(AxisSpec(-reach, reach, spec.m))
    return GridSpec(tuple(axes))


def _check_specs(f: GridFn, dual_spec: Optional[GridSpec]) -> GridSpec:
    f.require_proper()
    if dual_spec is None:
        dual_spec = default_dual_spec(f)
    if dual_spec.d != f.spec.d:
        raise InputError("Dual grid dimension differs from the primal grid", f"{dual_spec.d} != {f.spec.d}")
    return dual_spec


def _boundary_mask(indices: Tuple[np.ndarray, ...], shape: Tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(indices[0].shape, dtype=bool)
    for idx, m in zip(indices, shape):
        mask |= (idx == 0) | (idx == m - 1)
    return mask


def conjugate_bruteforce(f: GridFn, dual_spec: Optional[GridSpec] = None) -> ConjugateResult:
    """Reference conjugate: max over every primal node for every dual node."""
    dual_spec = _check_specs(f, dual_spec)
    flat = f.values.ravel()
    finite = np.flatnonzero(np.isfinite(flat))
    primal = f.spec.nodes()[finite]
    penalty = flat[finite]
    dual = dual_spec.nodes()

    values = np.empty(len(dual), dtype=float)
    argmax = np.empty(len(dual), dtype=np.int64)
    chunk = max(1, _BRUTEFORCE_BLOCK // max(1, len(primal)))
    for start in range(0, len(dual), chunk):
        block = dual[start:start + chunk] @ primal.T - penalty
        best = np.argmax(block, axis=1)
        values[start:start + chunk] = block[np.arange(len(best)), best]
        argmax[start:start + chunk] = finite[best]

    indices = np.unravel_index(argmax, f.spec.shape)
    mask = _boundary_mask(indices, f.spec.shape).reshape(dual_spec.shape)
    return ConjugateResult(GridFn(dual_spec, values.reshape(dual_spec.shape)), mask)


def conjugate_at(f: GridFn, slopes: np.ndarray) -> np.ndarray:
    """f*(s) = max over finite nodes z of s.z - f(z) at an (K, d) array of arbitrary slopes."""
    f.require_proper()
    slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
    if slopes.shape[1] != f.spec.d:
        raise InputError("Slope dimension differs from the grid", f"{slopes.shape[1]} != {f.spec.d}")
    flat = f.values.ravel()
    finite = np.isfinite(flat)
    primal = f.spec.nodes()[finite]
    penalty = flat[finite]
    out = np.empty(len(slopes), dtype=float)
    chunk = max(1, _BRUTEFORCE_BLOCK // max(1, len(primal)))
    for start in range(0, len(slopes), chunk):
        out[start:start + chunk] = np.max(slopes[start:start + chunk] @ primal.T - penalty, axis=1)
    return out


def _lower_hull(coords: list, values: list) -> list:
    hull: list = []
    for i in range(len(coords)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (coords[b] - coords[a]) * (values[i] - values[a]) \
                - (values[b] - values[a]) * (coords[i] - coords[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def llt_1d(slopes, coords, values) -> Tuple[np.ndarray, np.ndarray]:
    """
    Discrete conjugate of one sampled fiber.

    Args:
        slopes: nondecreasing dual coordinates
        coords: strictly increasing sample coordinates
        values: sample values (np.inf samples are ignored)

    Returns:
        (conjugate values at the slopes, index of the maximizing sample; -1 if none)
    """
    slopes = np.asarray(slopes, dtype=float)
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float)
    if coords.shape != values.shape or coords.ndim != 1:
        raise InputError("Coordinates and values must be matching 1-D sequences")
    if len(coords) > 1 and not np.all(np.diff(coords) > 0):
        raise InputError("Sample coordinates must be strictly increasing")
    if len(slopes) > 1 and not np.all(np.diff(slopes) >= 0):
        raise InputError("Slopes must be sorted")

    finite = np.flatnonzero(np.isfinite(values))
    if len(finite) == 0:
        return np.full(len(slopes), -np.inf), np.full(len(slopes), -1, dtype=np.int64)
    c = coords[finite]
    v = values[finite]
    hull = np.asarray(_lower_hull(c.tolist(), v.tolist()), dtype=np.int64)
    hc, hv = c[hull], v[hull]
    edges = np.diff(hv) / np.diff(hc)
    # the maximizer for slope s is the first hull vertex whose outgoing edge is not below s
    position = np.searchsorted(edges, slopes, side="left")
    return slopes * hc[position] - hv[position], finite[hull[position]]


def conjugate_grid(f: GridFn, dual_spec: Optional[GridSpec] = None) -> ConjugateResult:
    """Multi-axis conjugate by successive 1-D transforms; agrees with conjugate_bruteforce."""
    dual_spec = _check_specs(f, dual_spec)
    d = f.spec.d
    logger.debug(f"conjugate_grid: primal {f.spec.shape} -> dual {dual_spec.shape}")

    current = f.values
    argmaxes = [None] * d
    for axis in reversed(range(d)):
        penalty = current if axis == d - 1 else -current
        coords = f.spec.axes[axis].coords
        slopes = dual_spec.axes[axis].coords
        moved = np.moveaxis(penalty, axis, -1)
        fibers = moved.reshape(-1, moved.shape[-1])
        out = np.empty((fibers.shape[0], len(slopes)), dtype=float)
        arg = np.empty((fibers.shape[0], len(slopes)), dtype=np.int64)
        for row in range(fibers.shape[0]):
            out[row], arg[row] = llt_1d(slopes, coords, fibers[row])
        new_shape = moved.shape[:-1] + (len(slopes),)
        current = np.moveaxis(out.reshape(new_shape), -1, axis)
        argmaxes[axis] = np.moveaxis(arg.reshape(new_shape), -1, axis)

    grid_index = np.indices(dual_spec.shape)
    chosen = []
    for axis in range(d):
        selector = tuple(chosen) + tuple(grid_index[axis:])
        chosen.append(argmaxes[axis][selector])
    mask = _boundary_mask(tuple(chosen), f.spec.shape)
    return ConjugateResult(GridFn(dual_spec, current), mask)


# --------------------------------------------------------------------------- #
# Exact forms
# --------------------------------------------------------------------------- #

def conjugate_exact(f: ExactFn) -> ExactFn:
    """
    V-form {(p_k, v_k)}  <->  A-form max_k (p_k . s - v_k).

    Only A-forms on the whole space are conjugated; restricted domains go through grids.
    """
    if isinstance(f, GeneratorFn):
        return MaxAffineFn(tuple(AffinePiece(p, -v) for p, v in f.generators))
    if isinstance(f, MaxAffineFn):
        if f.domain is not None:
            raise UnsupportedRepresentationError(
                "Exact conjugation of a max-affine function with a restricted domain", "use the grid path")
        return GeneratorFn(tuple((p.slope, -p.offset) for p in f.pieces))
    raise UnsupportedRepresentationError("Exact conjugation needs a MaxAffineFn or GeneratorFn", type(f).__name__)


def _swap_exact(f: ExactFn) -> ExactFn:
    if isinstance(f, MaxAffineFn):
        return MaxAffineFn(tuple(AffinePiece(swap_blocks(p.slope), p.offset) for p in f.pieces))
    return GeneratorFn(tuple((swap_blocks(p), v) for p, v in f.generators))


def _swap_axes(values: np.ndarray, n: int) -> np.ndarray:
    return np.transpose(values, list(range(n, 2 * n)) + list(range(n)))


def j_transform(h: AnyFn, output_spec: Optional[GridSpec] = None, method: str = "llt") -> ConjugateResult:
    """
    (Jh)(x, x*) = h*(x*, x): conjugate, then exchange the primal and dual blocks.

    Grid inputs need X-axes and X*-axes with identical specs; the result lives on
    `output_spec` (default: the input grid).
    """
    if isinstance(h, (MaxAffineFn, GeneratorFn)):
        if h.dim % 2:
            raise InputError("J acts on functions of X x X*", h.dim)
        return ConjugateResult(_swap_exact(conjugate_exact(h)))
    if not isinstance(h, GridFn):
        raise UnsupportedRepresentationError("Unsupported function representation", type(h).__name__)
    output_spec = output_spec or h.spec
    if not h.spec.is_swappable() or not output_spec.is_swappable():
        raise InputError("J on a grid needs identical primal and dual axis specs")
    if method not in ("llt", "bruteforce"):
        raise InputError("Unknown grid conjugation method", method)
    transform = conjugate_grid if method == "llt" else conjugate_bruteforce
    result = transform(h, output_spec.swapped())
    n = output_spec.n
    values = _swap_axes(result.function.values, n)
    mask = _swap_axes(result.saturation_mask, n)
    return ConjugateResult(GridFn(output_spec, values), mask)


def biconjugate(h: AnyFn, method: str = "llt") -> ConjugateResult:
    """J applied twice: the closed convex hull of h (of its grid restriction for grids)."""
    if isinstance(h, GridFn):
        h.require_proper()
    first = j_transform(h, method=method)
    second = j_transform(first.function, method=method)
    return second
