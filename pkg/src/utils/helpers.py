import hashlib
import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, List, Tuple

from src.validation.error_handler import InputError

Rat = Fraction
RatVector = Tuple[Fraction, ...]


def to_fraction(value: Any) -> Fraction:
    """
    Exact rational conversion.

    Floats go through their shortest decimal repr, so 0.6 becomes 3/5 rather than the
    binary expansion. Strings may be decimals or "p/q".
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError("Boolean is not a number", value)
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError("Non-finite value where a rational is required", value)
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputError("Cannot read rational number", value) from e
    try:
        # numpy scalars
        return to_fraction(value.item())
    except AttributeError:
        raise InputError("Cannot read rational number", repr(value))


def to_fraction_vector(values: Iterable[Any]) -> RatVector:
    return tuple(to_fraction(v) for v in values)


def fraction_to_json(value: Fraction) -> Any:
    """Integers stay integers; everything else becomes a "p/q" string."""
    if value.denominator == 1:
        return int(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def ext_to_json(value: Any) -> Any:
    """JSON form of an extended real: rationals as fraction_to_json, floats as-is, infinities as strings."""
    if isinstance(value, Fraction):
        return fraction_to_json(value)
    if isinstance(value, float):
        if value == math.inf:
            return "+inf"
        if value == -math.inf:
            return "-inf"
        return value
    if isinstance(value, (list, tuple)):
        return [ext_to_json(v) for v in value]
    if hasattr(value, "item"):
        return ext_to_json(value.item())
    return value


def digest(payload: Any) -> str:
    """Short stable fingerprint of a JSON-serialisable payload."""
    text = json.dumps(ext_to_json(payload), sort_keys=True, default=str)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def dot(a: Iterable[Fraction], b: Iterable[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def random_rationals(rng, shape, bound: int = 4, denominator: int = 8) -> List:
    """
    Rationals k/denominator with |k/denominator| <= bound, drawn from a numpy Generator.

    Returns:
        nested lists of Fractions with the given shape
    """
    numerators = rng.integers(-bound * denominator, bound * denominator + 1, size=shape)
    return [[Fraction(int(k), denominator) for k in row] for row in numerators.reshape(-1, shape[-1])]


def parse_axis_option(option: str, dimension: int) -> List[Tuple[float, float, int]]:
    """
    Parse a CLI grid option.

    Args:
        option: "lo:hi:m" for every axis, or one such triple per axis separated by commas
        dimension: number of axes expected

    Returns:
        list of (lo, hi, m) per axis
    """
    parts = [p.strip() for p in option.split(',') if p.strip()]
    if len(parts) == 1:
        parts = parts * dimension
    if len(parts) != dimension:
        raise InputError(f"Grid option needs 1 or {dimension} axis triples", option)
    axes = []
    for part in parts:
        fields = part.split(':')
        if len(fields) != 3:
            raise InputError("Grid axis must look like lo:hi:m", part)
        try:
            axes.append((float(fields[0]), float(fields[1]), int(fields[2])))
        except ValueError as e:
            raise InputError("Grid axis must look like lo:hi:m", part) from e
    return axes
