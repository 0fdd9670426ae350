"""Tests for the non-adaptive ranking."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from odtn.adaptive import PermutationPolicy
from odtn.errors import DomainError, EnumerationInfeasibleError
from odtn.harness import exact_policy_cost
from odtn.models import OdtnInstance
from odtn.nonadaptive import (
    build_permutation,
    default_sample_count,
    exact_gain,
    merge_tiny_priors,
    permutation_cost,
    phase2_threshold,
    sampled_gain,
)
from odtn.state import replay
from tests.corpus import identifiable_corpus


def test_merge_skips_when_nothing_is_tiny() -> None:
    inst = OdtnInstance.from_rows(["+--", "-+-", "--+"])
    merged = merge_tiny_priors(inst)
    assert merged.prior == inst.prior
    assert merged.coverage_family == "elimination"


def test_merge_folds_tiny_scenarios() -> None:
    rows = ["+-+"] * 10
    inst = OdtnInstance.from_rows(rows, prior=["0.005", "0.005", "0.99"])
    merged = merge_tiny_priors(inst)
    assert merged.prior == (Fraction(1, 100), Fraction(0), Fraction(99, 100))
    assert merged.table.matrix == inst.matrix
    assert merged.coverage_family == "elimination+merged"


def test_merge_skips_single_test() -> None:
    inst = OdtnInstance.from_rows(["+--"], prior=["0.01", "0.01", "0.98"])
    assert merge_tiny_priors(inst).prior == inst.prior


def test_exact_gain_of_separating_test(separating_pair: OdtnInstance) -> None:
    assert exact_gain(separating_pair, [], 0) == 1


def test_exact_gain_after_full_cover() -> None:
    inst = OdtnInstance.from_rows(["+-", "-+"])
    assert exact_gain(inst, [0], 1) == 0


def test_exact_gain_averages_star_resolutions(star_then_separator: OdtnInstance) -> None:
    assert exact_gain(star_then_separator, [], 0) == Fraction(1, 4)


def test_exact_gain_rejects_selected(separating_pair: OdtnInstance) -> None:
    with pytest.raises(DomainError):
        exact_gain(separating_pair, [0], 0)


def test_exact_gain_cap() -> None:
    inst = OdtnInstance.from_rows(["*-", "*-", "+-"])
    with pytest.raises(EnumerationInfeasibleError):
        exact_gain(inst, [], 2, cap=1)


def test_default_sample_count() -> None:
    assert default_sample_count(3, 4, Fraction(1, 2)) == 13824


def test_phase2_threshold() -> None:
    assert phase2_threshold(5, 3, Fraction(1, 4)) == Fraction(1, 32400)


def test_sampled_gain_equals_exact_when_deterministic(useless_first: OdtnInstance) -> None:
    rng = np.random.default_rng(0)
    for samples in (1, 7, 50):
        assert sampled_gain(useless_first, [], 1, samples, rng) == exact_gain(useless_first, [], 1)


def test_sampled_gain_converges_on_star() -> None:
    inst = OdtnInstance.from_rows(["*+"], prior=[1, 0])
    samples = 4000
    estimate = sampled_gain(inst, [], 0, samples, np.random.default_rng(42))
    sigma = (0.25 / samples) ** 0.5
    assert abs(float(estimate) - 0.5) <= 4 * sigma


def test_sampled_gain_needs_samples(separating_pair: OdtnInstance) -> None:
    with pytest.raises(DomainError):
        sampled_gain(separating_pair, [], 0, 0, np.random.default_rng(0))


def test_permutation_starts_with_separator() -> None:
    inst = OdtnInstance.from_rows(["+-", "**"])
    for result in (build_permutation(inst, exact=True), build_permutation(inst, seed=3, samples=20)):
        assert result.permutation == (0, 1)
        assert result.phase2_start == 1


def test_sampled_ranking_is_seed_deterministic(noisy_three: OdtnInstance) -> None:
    first = build_permutation(noisy_three, seed=9, samples=30)
    again = build_permutation(noisy_three, seed=9, samples=30, workers=3)
    assert first == again
    assert first.sample_count == 30


def test_sampled_ranking_needs_seed(noisy_three: OdtnInstance) -> None:
    with pytest.raises(DomainError, match="seed"):
        build_permutation(noisy_three)


def test_ranking_covers_noiseless_instances() -> None:
    for inst in identifiable_corpus(seed=3, count=10, star_rate=0.0):
        result = build_permutation(inst, exact=True)
        assert sorted(result.permutation) == list(range(inst.n))
        for i in range(inst.m):
            state = replay(inst, [(e, inst.response(i, e)) for e in result.permutation])
            assert state.all_covered


def test_permutation_cost_orders(useless_first: OdtnInstance) -> None:
    assert permutation_cost(useless_first, (1, 0)) == 1
    assert permutation_cost(useless_first, (0, 1)) == 2


def test_permutation_cost_with_star(star_then_separator: OdtnInstance) -> None:
    assert permutation_cost(star_then_separator, (0, 1)) == Fraction(7, 4)


def test_permutation_cost_rejects_non_permutation(useless_first: OdtnInstance) -> None:
    with pytest.raises(DomainError):
        permutation_cost(useless_first, (0, 0))


def test_permutation_cost_matches_policy_evaluation() -> None:
    for inst in identifiable_corpus(seed=4, count=12, star_rate=0.25):
        order = build_permutation(inst, exact=True).permutation
        expected = exact_policy_cost(inst, PermutationPolicy(inst, order)).cost
        assert permutation_cost(inst, order) == expected


@pytest.mark.slow
def test_sampled_choice_is_near_the_best_gain() -> None:
    steps = misses = 0
    for inst in identifiable_corpus(seed=13, count=20, m_range=(3, 3), n_range=(3, 3), star_rate=0.3):
        for seed in range(5):
            ranking = build_permutation(inst, seed)
            assert ranking.sample_count == default_sample_count(3, 3, Fraction(1, 2))
            last = ranking.phase2_start if ranking.phase2_start is not None else inst.n
            for t in range(last):
                before = list(ranking.permutation[:t])
                gains = {e: exact_gain(inst, before, e) for e in range(inst.n) if e not in before}
                steps += 1
                if 4 * gains[ranking.permutation[t]] < max(gains.values()):
                    misses += 1
    assert steps > 0
    assert misses <= 0.01 * steps


def test_exact_ranking_ignores_prior_scale() -> None:
    for inst in identifiable_corpus(seed=14, count=10, star_rate=0.25):
        scaled = replace(inst, prior=tuple(5 * p for p in inst.prior))
        assert (
            build_permutation(scaled, exact=True).permutation
            == build_permutation(inst, exact=True).permutation
        )
