from fractions import Fraction

import numpy as np
import pytest
import yaml

from src.api.models.report_models import LemmaReport
from src.core.convex.functions import DUAL, PRIMAL, GeneratorFn, GridFn, GridSpec
from src.core.fitzpatrick import phi_finite, sigma_finite
from src.core.legendre.transform import ConjugateResult, conjugate_grid
from src.core.lemmas import (
    BatteryResult,
    check_conjugate_shift,
    check_domain_invariance,
    check_gg,
    check_projection_inclusions,
    check_range_domain_duality,
    check_recession_inclusion,
    fenchel_young_check,
    lipschitz_profile,
    load_catalog,
    order_reversal_check,
    random_monotone_matrix,
    run_battery,
)
from src.core.lemmas.battery import negative_controls, point_indicator_grid
from src.core.operators.models import (
    FiniteOperator,
    LinearOperator,
    PwlCurve1d,
    SlopedPiece,
    identity_curve,
    rotation_operator,
    sign_curve,
)
from src.core.operators.predicates import is_monotone, linear_is_monotone
from src.validation.error_handler import InputError, PreconditionError

LINE = GridSpec.symmetric(1, 2.0, 17)
SEGMENT = PwlCurve1d((SlopedPiece.of(-1, 1, 0, 0),))


@pytest.fixture
def half_square():
    return GridFn.from_callable(LINE, lambda z: 0.5 * z ** 2)


# --------------------------------------------------------------------------- #
# Inequalities
# --------------------------------------------------------------------------- #

def test_conjugate_shift_on_generators(diagonal_pair):
    report = check_conjugate_shift(sigma_finite(diagonal_pair), [((0, 0), (1, 1), 1)])
    assert report.holds
    assert report.worst_margin == -1.0
    assert report.lemma_id == "conjugate-shift"


def test_conjugate_shift_on_grid_and_wrong_support():
    line = GridFn.from_callable(LINE, lambda z: -z)
    assert check_conjugate_shift(line, [((0,), (1,), 1)]).holds
    report = check_conjugate_shift(line, [((0,), (1,), 1)], support=lambda w: 0)
    assert not report.holds
    assert report.worst_margin == pytest.approx(2.0)
    with pytest.raises(InputError):
        check_conjugate_shift(line, [((0,), (1,), -1)])


def test_fenchel_young_on_grid(half_square):
    assert fenchel_young_check(half_square).holds
    lowered = conjugate_grid(half_square).function
    lowered = GridFn(lowered.spec, lowered.values - 1.0)
    report = fenchel_young_check(half_square, conjugate=lowered)
    assert not report.holds
    assert report.worst_margin == pytest.approx(1.0)


def test_fenchel_young_on_exact_forms():
    f = GeneratorFn.of([((0,), 0), ((2,), 4)])
    assert fenchel_young_check(f, probes=[((1,), (1,)), ((2,), (3,))]).holds
    with pytest.raises(InputError):
        fenchel_young_check(f)


def test_order_reversal_on_grids(half_square):
    square = GridFn.from_callable(LINE, lambda z: z ** 2)
    assert order_reversal_check(half_square, square).holds
    reversed_premise = order_reversal_check(square, half_square)
    assert reversed_premise.skipped and reversed_premise.passed
    other = GridFn.from_callable(GridSpec.symmetric(1, 1.0, 5), lambda z: z)
    with pytest.raises(InputError):
        order_reversal_check(half_square, other)


def test_order_reversal_on_generators(diagonal_pair):
    origin = sigma_finite(FiniteOperator(diagonal_pair.pairs[:1]))
    pair = sigma_finite(diagonal_pair)
    assert order_reversal_check(origin, pair, probes=[(10, 10)]).skipped
    report = order_reversal_check(origin, pair, probes=[(10, 10)], check_premise=False)
    assert not report.holds
    assert report.worst_margin == 19.0


def test_pairing_sign_on_curves():
    assert check_gg(sign_curve()).holds
    assert check_gg(identity_curve()).holds
    with pytest.raises(PreconditionError):
        check_gg(SEGMENT)
    assert not check_gg(SEGMENT, assume_maximal=True).holds
    with pytest.raises(InputError):
        check_gg(FiniteOperator.of([(0, 0)]))


@pytest.mark.parametrize("L, holds", [(1, True), (Fraction(1, 2), False)])
def test_lipschitz_profile_of_max_affine(diagonal_pair, L, holds):
    report = lipschitz_profile(ConjugateResult(phi_finite(diagonal_pair)), PRIMAL, L)
    assert report.holds is holds
    assert report.lemma_id == "lipschitz-primal"


def test_lipschitz_profile_on_grid(square_grid):
    conjugate = conjugate_grid(square_grid, square_grid.spec)
    # saturated boundary nodes are finite, so they still count toward the domain shape
    assert conjugate.saturation_mask.any()
    report = lipschitz_profile(conjugate, DUAL, 2)
    assert report.holds
    assert "domain factorizes: True" in report.note
    with pytest.raises(InputError):
        lipschitz_profile(ConjugateResult(square_grid), PRIMAL, 1)
    with pytest.raises(InputError):
        lipschitz_profile(ConjugateResult(square_grid), "sideways", 1)


# --------------------------------------------------------------------------- #
# Domains
# --------------------------------------------------------------------------- #

def test_domain_invariance_by_operator_kind(diagonal_pair):
    non_monotone = check_domain_invariance(FiniteOperator.of([(0, 1), (1, 0)]))
    assert not non_monotone.holds
    assert non_monotone.witness is not None
    finite = check_domain_invariance(diagonal_pair)
    assert finite.skipped
    assert check_domain_invariance(rotation_operator()).holds
    assert check_domain_invariance(LinearOperator.of([[1, 0], [0, 2]])).holds
    assert check_domain_invariance(identity_curve()).holds


def test_range_domain_duality():
    assert check_range_domain_duality(rotation_operator()).holds
    assert check_range_domain_duality(identity_curve()).holds
    assert check_range_domain_duality(FiniteOperator.of([(0, 0)])).skipped
    assert not check_range_domain_duality(SEGMENT, assume_maximal=True).holds


def test_recession_inclusion_on_identity():
    assert check_recession_inclusion(identity_curve()).holds
    report = check_recession_inclusion(identity_curve(), cone_domain=lambda z: z[0] == z[1])
    assert not report.holds
    assert report.worst_margin >= 1


def test_projection_inclusions(square_grid):
    assert check_projection_inclusions(square_grid, "both").holds
    assert not check_projection_inclusions(point_indicator_grid(2.0, 17), "jh_ge_pi").holds
    with pytest.raises(InputError):
        check_projection_inclusions(square_grid, "neither")


# --------------------------------------------------------------------------- #
# Catalog and battery
# --------------------------------------------------------------------------- #

def test_catalog_is_a_function_of_the_seed():
    first = load_catalog(seed=7, finite_sets=4, linear_maps=2)
    again = load_catalog(seed=7, finite_sets=4, linear_maps=2)
    other = load_catalog(seed=8, finite_sets=4, linear_maps=2)
    assert len(first) == 13
    assert [e.operator for e in first] == [e.operator for e in again]
    assert [e.operator for e in first] != [e.operator for e in other]
    assert sum(e.randomized for e in first) == 6


def test_random_catalog_entries_are_monotone():
    for entry in load_catalog(seed=3, finite_sets=6, linear_maps=4):
        if isinstance(entry.operator, FiniteOperator):
            assert is_monotone(entry.operator).holds
        elif isinstance(entry.operator, LinearOperator):
            assert linear_is_monotone(entry.operator)


def test_random_matrix_has_definite_symmetric_part():
    m = random_monotone_matrix(np.random.default_rng(1), 2)
    symmetric = np.array([[float(m[i][j] + m[j][i]) / 2 for j in range(2)] for i in range(2)])
    assert np.linalg.eigvalsh(symmetric).min() > 0


def test_catalog_file_errors(tmp_path):
    with pytest.raises(InputError):
        load_catalog(tmp_path / "missing.yaml")
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(InputError):
        load_catalog(listing)


def test_catalog_from_file(tmp_path):
    path = tmp_path / "catalog.yaml"
    path.write_text(yaml.safe_dump({
        "operators": [{"name": "pair", "kind": "finite", "pairs": [[[0], [0]], [[1], [1]]]}],
        "random": {"finite_sets": 1},
    }), encoding="utf-8")
    entries = load_catalog(path, seed=1)
    assert [e.name for e in entries] == ["pair", "random finite #1 (n=1)"]
    assert len(entries[0].operator) == 2


def test_battery_rejects_unknown_suite():
    with pytest.raises(InputError):
        run_battery([], suite="everything")


def test_gate_suite_passes_with_its_controls():
    result = run_battery([], suite="gate", resolution=17)
    assert result.passed
    assert len(result.reports) == 6
    assert sum(r.expected_failure for r in result.reports) == 2


def test_battery_result_counts_failures():
    held = LemmaReport(lemma_id="a", inputs_digest="0", holds=True, worst_margin=0.0)
    control = LemmaReport(lemma_id="b", inputs_digest="0", holds=True, worst_margin=0.0, expected_failure=True)
    result = BatteryResult("lemmas", [held, control])
    assert not result.passed
    assert result.failures == [control]


def test_lemma_controls_include_an_unbounded_dual_profile():
    controls = [r for r in negative_controls("lemmas", 2.0, 17, 1e-9, 1e-6) if r.lemma_id == "lipschitz-dual"]
    assert len(controls) == 1
    assert not controls[0].holds
    assert controls[0].passed
    assert controls[0].worst_margin > 0
