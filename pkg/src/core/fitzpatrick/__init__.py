from src.core.fitzpatrick.constructions import (
    jdelta_pwl1d_eval,
    jdelta_pwl1d_grid,
    phi_finite,
    phi_linear_eval,
    phi_pwl1d_eval,
    phi_pwl1d_grid,
    sigma_finite,
    sigma_linear_domain,
    sigma_linear_eval,
)
from src.core.fitzpatrick.membership import (
    family_membership,
    minimality_maximality_envelope,
    point_evaluator,
)
