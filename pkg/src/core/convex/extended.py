"""
Extended reals: exact rationals plus the two infinities.

Finite values are `fractions.Fraction`; the infinities are the float sentinels
`math.inf` / `-math.inf`, which compare correctly against Fractions.
"""
import math
from fractions import Fraction
from typing import Union

from src.validation.error_handler import InputError

ExtReal = Union[Fraction, float]

INF: float = math.inf
NEG_INF: float = -math.inf


def is_finite(value: ExtReal) -> bool:
    return not (isinstance(value, float) and math.isinf(value))


def ext_add(a: ExtReal, b: ExtReal) -> ExtReal:
    """Addition with r + inf = inf for r > -inf; inf + (-inf) is rejected."""
    if is_finite(a) and is_finite(b):
        return a + b
    if (a == INF and b == NEG_INF) or (a == NEG_INF and b == INF):
        raise InputError("inf - inf is undefined")
    return INF if INF in (a, b) else NEG_INF


def ext_scale(alpha: Fraction, value: ExtReal) -> ExtReal:
    """alpha * value for alpha >= 0, with 0 * inf = 0 (indicator convention)."""
    if alpha < 0:
        raise InputError("Only nonnegative scaling is defined on extended reals", alpha)
    if is_finite(value):
        return alpha * value
    return Fraction(0) if alpha == 0 else value


def to_float(value: ExtReal) -> float:
    return value if isinstance(value, float) else float(value)
