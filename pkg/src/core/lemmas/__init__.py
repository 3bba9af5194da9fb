from src.core.lemmas.battery import SUITES, BatteryResult, negative_controls, run_battery, separable_sum_grid
from src.core.lemmas.catalog import DEFAULT_CATALOG_PATH, CatalogEntry, load_catalog, random_monotone_matrix
from src.core.lemmas.domains import (
    PRECONDITIONS,
    check_domain_invariance,
    check_projection_inclusions,
    check_range_domain_duality,
    check_recession_inclusion,
)
from src.core.lemmas.inequalities import (
    check_conjugate_shift,
    check_gg,
    fenchel_young_check,
    lipschitz_profile,
    order_reversal_check,
)
