from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    Operator,
    PwlCurve1d,
    SlopedPiece,
    VerticalPiece,
    huber_derivative,
    identity_curve,
    interval_normal_cone,
    point_normal_cone,
    rotation_operator,
    sign_curve,
)
from src.core.operators.predicates import (
    MonotoneCheck,
    is_maximal_1d,
    is_monotone,
    linear_is_monotone,
    monotone_violations_array,
    sample_graph,
)
