"""Tests for instance validation and static diagnostics."""

from fractions import Fraction

import numpy as np
import pytest

from odtn.coverage import to_asrn
from odtn.diagnostics import (
    check_feasibility,
    check_identifiability,
    max_side,
    observed_separability,
    require_valid,
    separability,
    separates,
    uncertainty_stats,
    validate_instance,
)
from odtn.errors import DegenerateInstanceError, InvalidInstanceError
from odtn.models import OdtnInstance


def test_minimal_instance_is_valid() -> None:
    inst = OdtnInstance.from_rows(["+-", "-+"], prior=[0.5, 0.5])
    assert validate_instance(inst).valid


def test_prior_sum_issue() -> None:
    inst = OdtnInstance.from_rows(["+-", "-+"], prior=[0.6, 0.6])
    report = validate_instance(inst)
    assert not report.valid
    assert "prior sums to 1.2" in report.issues


def test_unknown_symbol_issue() -> None:
    inst = OdtnInstance.from_rows(["+x"])
    issues = validate_instance(inst).issues
    assert any(issue.startswith("unknown symbol 'x'") for issue in issues)


def test_validation_collects_every_issue() -> None:
    inst = OdtnInstance.from_rows(["+x", "+"], prior=["-1/2", "3/2", "0"])
    issues = validate_instance(inst).issues
    assert any("negative" in issue for issue in issues)
    assert any("row has length" in issue for issue in issues)
    assert any("unknown symbol" in issue for issue in issues)


def test_star_in_alphabet_is_an_issue() -> None:
    inst = OdtnInstance.from_rows(["+-"], outcomes=("+", "*"))
    assert "outcome alphabet must not contain '*'" in validate_instance(inst).issues


def test_require_valid_raises_with_issues() -> None:
    inst = OdtnInstance.from_rows(["+-"], prior=[0.6, 0.6])
    with pytest.raises(InvalidInstanceError) as info:
        require_valid(inst)
    assert info.value.issues == ["prior sums to 1.2"]
    assert info.value.exit_code == 3


def test_single_separating_test_is_identifiable() -> None:
    result = check_identifiability(OdtnInstance.from_rows(["+-"]))
    assert result.identifiable
    assert result.witness is None


def test_star_blocks_identifiability() -> None:
    result = check_identifiability(OdtnInstance.from_rows(["+*"]))
    assert not result.identifiable
    assert result.witness == (0, 1)


def test_first_unseparated_pair_is_the_witness() -> None:
    inst = OdtnInstance.from_rows(["+-*", "*+-"])
    assert check_identifiability(inst).witness == (0, 2)
    assert separates(inst, 0, 1)
    assert not separates(inst, 2, 0)


def test_uncertainty_noiseless() -> None:
    stats = uncertainty_stats(OdtnInstance.from_rows(["+-", "-+"]))
    assert (stats.c, stats.r, stats.alpha) == (0, 0, 0.0)


def test_uncertainty_counts_stars() -> None:
    stats = uncertainty_stats(OdtnInstance.from_rows(["*-", "+*"]))
    assert (stats.c, stats.r) == (1, 1)


def test_uncertainty_alpha_for_quarter_sides() -> None:
    rows = ["++++----" + "*" * 8, "*" * 8 + "++++----"]
    stats = uncertainty_stats(OdtnInstance.from_rows(rows))
    assert stats.max_side == 4
    assert stats.alpha == pytest.approx(0.5)


def test_uncertainty_needs_two_hypotheses() -> None:
    with pytest.raises(DegenerateInstanceError):
        uncertainty_stats(OdtnInstance.from_rows(["+"]))


def test_max_side(star_three: OdtnInstance) -> None:
    assert max_side(star_three) == 1


@pytest.mark.parametrize(("m", "expected"), [(2, Fraction(1)), (11, Fraction(1, 10)), (101, Fraction(1, 100))])
def test_separability_of_odtn(m: int, expected: Fraction) -> None:
    inst = OdtnInstance.from_rows(["+" * m])
    assert separability(inst) == expected


def test_separability_of_asrn_is_declared(twins: OdtnInstance) -> None:
    assert separability(to_asrn(twins, "ftilde", d=1)) == Fraction(1, 2)


def test_feasible_when_identifiable(noisy_three: OdtnInstance) -> None:
    assert check_feasibility(to_asrn(noisy_three)) is None


def test_infeasible_scenario_is_reported() -> None:
    found = check_feasibility(to_asrn(OdtnInstance.from_rows(["+*"])))
    assert found == (0, ("+",))


def test_observed_separability_respects_declared(noisy_three: OdtnInstance) -> None:
    smallest = observed_separability(noisy_three, np.random.default_rng(3), chains=50)
    assert smallest is not None
    assert smallest >= separability(noisy_three)
