"""
The two extreme members of the Fitzpatrick family of a monotone T:

    phi_T(x, x*) = sup_{(y, y*) in T} <x, y*> + <y, x*> - <y, y*>
    sigma_T      = closed convex hull of (pi + indicator of T)

For finite T both are exact polyhedral objects. For curves and linear maps phi_T is
an evaluation oracle with a closed form per piece.
"""
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from src.core.convex.exact import solve_any
from src.core.convex.extended import INF, NEG_INF, ExtReal, to_float
from src.core.convex.functions import AffinePiece, GeneratorFn, GridFn, GridSpec, MaxAffineFn, PrimalDualPoint, pairing
from src.core.convex.geometry import HPolyhedron
from src.core.operators.models import FiniteOperator, LinearOperator, PwlCurve1d, SlopedPiece
from src.core.operators.predicates import is_maximal_1d
from src.utils.helpers import dot
from src.validation.error_handler import InputError

PointLike = Union[PrimalDualPoint, Sequence]


def _as_point(z: PointLike) -> PrimalDualPoint:
    return z if isinstance(z, PrimalDualPoint) else PrimalDualPoint.from_flat(z)


def phi_finite(T: FiniteOperator) -> MaxAffineFn:
    """One affine piece per (y, y*): slope (y*, y), offset -<y, y*>."""
    if len(T) == 0:
        raise InputError("Fitzpatrick function of an empty operator")
    return MaxAffineFn(tuple(AffinePiece(p.xstar + p.x, -pairing(p)) for p in T.pairs))


def sigma_finite(T: FiniteOperator) -> GeneratorFn:
    """Generators ((y, y*), <y, y*>)."""
    if len(T) == 0:
        raise InputError("Fitzpatrick function of an empty operator")
    return GeneratorFn(tuple((p.flat, pairing(p)) for p in T.pairs))


def _max_linear(coefficient: Fraction, constant: Fraction, lo, hi) -> ExtReal:
    """sup of coefficient*t + constant over t in [lo, hi] (None = unbounded)."""
    if coefficient > 0:
        return INF if hi is None else coefficient * hi + constant
    if coefficient < 0:
        return INF if lo is None else coefficient * lo + constant
    return constant


def _max_concave_quadratic(a: Fraction, c: Fraction, constant: Fraction, lo, hi) -> ExtReal:
    """sup of -a t^2 + c t + constant over [lo, hi], a > 0."""
    t = c / (2 * a)
    if lo is not None and t < lo:
        t = lo
    if hi is not None and t > hi:
        t = hi
    return -a * t * t + c * t + constant


def _require_maximal(T: PwlCurve1d) -> None:
    if not is_maximal_1d(T):
        raise InputError("Curve is not maximal monotone (a proper monotone extension exists)")


def phi_pwl1d_eval(T: PwlCurve1d, z: PointLike) -> ExtReal:
    """Exact phi_T(x, x*) for a maximal piecewise-linear curve."""
    _require_maximal(T)
    z = _as_point(z)
    if z.n != 1:
        raise InputError("Curves act on n = 1", z.n)
    x, xs = z.x[0], z.xstar[0]
    best: ExtReal = NEG_INF
    for segment in T.segments:
        if isinstance(segment, SlopedPiece):
            a, b = segment.a, segment.b
            linear = a * x + xs - b
            if a > 0:
                value = _max_concave_quadratic(a, linear, b * x, segment.lo, segment.hi)
            else:
                value = _max_linear(linear, b * x, segment.lo, segment.hi)
        else:
            value = _max_linear(x - segment.v, segment.v * xs, segment.lo, segment.hi)
        best = max(best, value)
        if best == INF:
            break
    return best


def jdelta_pwl1d_eval(T: PwlCurve1d, z: PointLike) -> ExtReal:
    """J of the graph indicator: sup over the curve of x y* + y x*."""
    z = _as_point(z)
    if z.n != 1:
        raise InputError("Curves act on n = 1", z.n)
    x, xs = z.x[0], z.xstar[0]
    best: ExtReal = NEG_INF
    for segment in T.segments:
        if isinstance(segment, SlopedPiece):
            value = _max_linear(segment.a * x + xs, segment.b * x, segment.lo, segment.hi)
        else:
            value = _max_linear(x, segment.v * xs, segment.lo, segment.hi)
        best = max(best, value)
        if best == INF:
            break
    return best


def phi_linear_eval(T: LinearOperator, z: PointLike) -> ExtReal:
    """
    phi_T for monotone linear T with symmetric part S and q = M^T x + x*:
    q^T w / 4 where S w = q, and +inf when q is outside the range of S.
    """
    z = _as_point(z)
    if z.n != T.n:
        raise InputError("Point dimension differs from the operator", f"{z.n} != {T.n}")
    n = T.n
    m = T.matrix
    symmetric = [[(m[i][j] + m[j][i]) / 2 for j in range(n)] for i in range(n)]
    q = [sum((m[k][i] * z.x[k] for k in range(n)), Fraction(0)) + z.xstar[i] for i in range(n)]
    w = solve_any(symmetric, q)
    if w is None:
        return INF
    return dot(q, w) / 4


def sigma_linear_domain(T: LinearOperator) -> HPolyhedron:
    """D(sigma_T) = graph of M, as the rows x* - M x <= 0 and M x - x* <= 0."""
    n = T.n
    rows = []
    for i in range(n):
        a = [-v for v in T.matrix[i]] + [Fraction(int(j == i)) for j in range(n)]
        rows.append((a, 0))
        rows.append(([-v for v in a], 0))
    return HPolyhedron.from_rows(rows, 2 * n)


def sigma_linear_eval(T: LinearOperator, z: PointLike) -> ExtReal:
    """pi + indicator of the graph (already closed convex for monotone T)."""
    z = _as_point(z)
    if not sigma_linear_domain(T).contains(z.flat):
        return INF
    return pairing(z)


def phi_pwl1d_grid(T: PwlCurve1d, spec: GridSpec) -> GridFn:
    """phi_T of a curve sampled at the nodes of a (x, x*) grid, each node evaluated exactly."""
    if spec.d != 2:
        raise InputError("Curves act on n = 1; the grid needs two axes", spec.d)
    nodes = [spec.exact_node(index) for index in np.ndindex(*spec.shape)]
    values = np.array([to_float(phi_pwl1d_eval(T, node)) for node in nodes], dtype=float)
    return GridFn(spec, values.reshape(spec.shape))


def jdelta_pwl1d_grid(T: PwlCurve1d, spec: GridSpec) -> GridFn:
    if spec.d != 2:
        raise InputError("Curves act on n = 1; the grid needs two axes", spec.d)
    nodes = [spec.exact_node(index) for index in np.ndindex(*spec.shape)]
    values = np.array([to_float(jdelta_pwl1d_eval(T, node)) for node in nodes], dtype=float)
    return GridFn(spec, values.reshape(spec.shape))
