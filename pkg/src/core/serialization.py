"""
JSON documents <-> domain objects.

Every decoder validates against the schema in config/validation_rules first, so a
malformed document fails with the path of the offending field. Numbers may be JSON
numbers or rational strings ("3/5", "0.6"); both are read exactly.
"""
from typing import Any, Dict, Union

import numpy as np

from src.core.convex.functions import AffinePiece, GeneratorFn, GridFn, GridSpec, MaxAffineFn
from src.core.convex.geometry import HPolyhedron, NormBall, Region, VPolytope
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    Operator,
    PwlCurve1d,
    SlopedPiece,
    VerticalPiece,
    rotation_operator,
)
from src.utils.helpers import fraction_to_json, to_fraction
from src.validation.error_handler import InputError
from src.validation.schema_checker import validate_document

Function = Union[GridFn, MaxAffineFn, GeneratorFn]

INF_LITERAL = "+inf"


def _vector(values) -> list:
    return [fraction_to_json(v) for v in values]


def _bound(value):
    return None if value is None else to_fraction(value)


def _bound_json(value):
    return None if value is None else fraction_to_json(value)


# --------------------------------------------------------------------------- #
# Operators
# --------------------------------------------------------------------------- #

def decode_operator(doc: Dict[str, Any]) -> Operator:
    validate_document(doc, "operator")
    kind = doc["kind"]
    if kind == "finite":
        return FiniteOperator.of((y, ystar) for y, ystar in doc["pairs"])
    if kind == "pwl1d":
        segments = []
        for segment in doc["segments"]:
            if segment["type"] == "sloped":
                segments.append(SlopedPiece(_bound(segment["lo"]), _bound(segment["hi"]),
                                            to_fraction(segment["a"]), to_fraction(segment["b"])))
            else:
                segments.append(VerticalPiece(to_fraction(segment["v"]), _bound(segment["lo"]), _bound(segment["hi"])))
        return PwlCurve1d(tuple(segments))
    if kind == "linear":
        return LinearOperator.of(doc["matrix"])
    return rotation_operator()


def encode_operator(T: Operator) -> Dict[str, Any]:
    if isinstance(T, FiniteOperator):
        return {"kind": "finite", "pairs": [[_vector(p.x), _vector(p.xstar)] for p in T.pairs]}
    if isinstance(T, PwlCurve1d):
        segments = []
        for s in T.segments:
            if isinstance(s, SlopedPiece):
                segments.append({"type": "sloped", "lo": _bound_json(s.lo), "hi": _bound_json(s.hi),
                                 "a": fraction_to_json(s.a), "b": fraction_to_json(s.b)})
            else:
                segments.append({"type": "vertical", "v": fraction_to_json(s.v),
                                 "lo": _bound_json(s.lo), "hi": _bound_json(s.hi)})
        return {"kind": "pwl1d", "segments": segments}
    if isinstance(T, LinearOperator):
        return {"kind": "linear", "matrix": [_vector(row) for row in T.matrix]}
    raise InputError("Cannot encode operator", type(T).__name__)


# --------------------------------------------------------------------------- #
# Regions
# --------------------------------------------------------------------------- #

def decode_region(doc: Dict[str, Any], path: str = "") -> Region:
    validate_document(doc, "region", prefix=path)
    kind = doc["kind"]
    if kind == "hpolyhedron":
        return HPolyhedron.from_rows([(row["a"], row["b"]) for row in doc["halfspaces"]], int(doc["dim"]))
    if kind == "vpolytope":
        return VPolytope.from_points(doc["vertices"])
    return NormBall.of(doc["center"], doc["radius"])


def encode_region(region: Region) -> Dict[str, Any]:
    if isinstance(region, HPolyhedron):
        return {"kind": "hpolyhedron", "dim": region.dim,
                "halfspaces": [{"a": _vector(h.a), "b": fraction_to_json(h.b)} for h in region.halfspaces]}
    if isinstance(region, VPolytope):
        return {"kind": "vpolytope", "vertices": [_vector(v) for v in region.vertices]}
    if isinstance(region, NormBall):
        return {"kind": "normball", "center": _vector(region.center), "radius": fraction_to_json(region.radius)}
    raise InputError("Cannot encode region", type(region).__name__)


# --------------------------------------------------------------------------- #
# Functions
# --------------------------------------------------------------------------- #

def decode_function(doc: Dict[str, Any]) -> Function:
    validate_document(doc, "function")
    kind = doc["kind"]
    if kind == "max_affine":
        pieces = tuple(AffinePiece.of(p["slope"], p["offset"]) for p in doc["pieces"])
        domain = doc.get("domain")
        return MaxAffineFn(pieces, None if domain is None else decode_region(domain, path="domain"))
    if kind == "generators":
        return GeneratorFn.of([(g["point"], g["value"]) for g in doc["generators"]])
    spec = GridSpec.from_dict(doc["grid"])
    values = np.array([np.inf if v == INF_LITERAL else float(v) for v in doc["values"]], dtype=float)
    if values.size != spec.size:
        raise InputError("Grid values do not match the node count", f"{values.size} != {spec.size}")
    return GridFn(spec, values.reshape(spec.shape))


def encode_function(f: Function) -> Dict[str, Any]:
    if isinstance(f, MaxAffineFn):
        return {"kind": "max_affine",
                "pieces": [{"slope": _vector(p.slope), "offset": fraction_to_json(p.offset)} for p in f.pieces],
                "domain": None if f.domain is None else encode_region(f.domain)}
    if isinstance(f, GeneratorFn):
        return {"kind": "generators",
                "generators": [{"point": _vector(p), "value": fraction_to_json(v)} for p, v in f.generators]}
    if isinstance(f, GridFn):
        return {"kind": "grid", "grid": f.spec.to_dict(),
                "values": [INF_LITERAL if np.isposinf(v) else float(v) for v in f.values.ravel()]}
    raise InputError("Cannot encode function", type(f).__name__)
