from src.core.legendre.transform import (
    METHODS,
    ConjugateResult,
    biconjugate,
    conjugate_at,
    conjugate_bruteforce,
    conjugate_exact,
    conjugate_grid,
    default_dual_spec,
    j_transform,
    llt_1d,
)
