"""
Convex core: extended reals, regions, exact hulls and the three function carriers.
"""
from src.core.convex.extended import INF, NEG_INF, ExtReal, ext_add, ext_scale, is_finite
from src.core.convex.functions import (
    DUAL,
    PRIMAL,
    AffinePiece,
    AxisSpec,
    FullSpace,
    GeneratorFn,
    GridFn,
    GridSet,
    GridSpec,
    MaxAffineFn,
    PrimalDualPoint,
    pairing,
    pairing_array,
    project_domain,
)
from src.core.convex.geometry import (
    ConvexHull,
    HalfSpace,
    HPolyhedron,
    NormBall,
    Region,
    VPolytope,
    bounding_box,
    convex_hull,
    indicator_eval,
    recession_cone,
    support_function,
)
