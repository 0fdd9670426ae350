"""Tests for the compact belief state, checked against brute-force enumeration."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from odtn.errors import AlreadySelectedError, DomainError, InconsistentObservationsError
from odtn.expanded import expanded_scenarios, naive_counts, naive_posterior
from odtn.models import OdtnInstance
from odtn.state import (
    AllCovered,
    apply_observation,
    branch_masses,
    compatible_set,
    init_state,
    posterior,
    replay,
)
from tests.corpus import identifiable_corpus, random_walk


def test_init_state_carries_prior_mass(noisy_three: OdtnInstance) -> None:
    state = init_state(noisy_three)
    assert sum(state.mass(i) for i in range(3)) == 1
    assert state.compatible == {0, 1, 2}
    assert not any(state.covered)


def test_init_state_uniform_pair(separating_pair: OdtnInstance) -> None:
    state = init_state(separating_pair)
    assert (state.mass(0), state.mass(1)) == (Fraction(1, 2), Fraction(1, 2))


def test_observation_kills_contradicted(separating_pair: OdtnInstance) -> None:
    state = apply_observation(init_state(separating_pair), 0, "+")
    assert state.alive == (True, False)
    assert state.all_covered


def test_star_halves_the_count() -> None:
    inst = OdtnInstance.from_rows(["*+", "*-"])
    state = init_state(inst)
    assert state.count(0) == 4
    state = apply_observation(state, 0, "-")
    assert state.count(0) == 2
    assert state.stars_seen == (1, 0)


def test_matching_deterministic_keeps_count() -> None:
    inst = OdtnInstance.from_rows(["+-", "*+"])
    state = apply_observation(init_state(inst), 0, "+")
    assert state.count(0) == 2
    assert state.count(1) == 0


def test_repeated_element() -> None:
    inst = OdtnInstance.from_rows(["+-", "-+"])
    state = apply_observation(init_state(inst), 0, "+")
    with pytest.raises(AlreadySelectedError):
        apply_observation(state, 0, "-")


def test_unknown_outcome_and_element(separating_pair: OdtnInstance) -> None:
    state = init_state(separating_pair)
    with pytest.raises(DomainError, match="outcome"):
        apply_observation(state, 0, "?")
    with pytest.raises(DomainError, match="out of range"):
        apply_observation(state, 3, "+")


def test_branch_masses_split_star(star_three: OdtnInstance) -> None:
    stats = branch_masses(init_state(star_three), 0)
    assert stats.mass == {"+": Fraction(1, 2), "-": Fraction(1, 2)}
    assert stats.count == {"+": 2, "-": 2}


def test_branch_masses_unanimous() -> None:
    inst = OdtnInstance.from_rows(["+++", "+-*"])
    stats = branch_masses(init_state(inst), 0)
    assert stats.mass == {"+": Fraction(1), "-": Fraction(0)}


def test_branch_masses_star_scenarios_split_counts_equally() -> None:
    inst = OdtnInstance.from_rows(["+-+", "*-*", "+--"])
    state = apply_observation(init_state(inst), 0, "+")
    stats = branch_masses(state, 1)
    assert stats.count == {"+": 2, "-": 2}
    assert stats.mass == {"+": Fraction(1, 3), "-": Fraction(1, 3)}


def test_branch_masses_rejects_selected(separating_pair: OdtnInstance) -> None:
    state = apply_observation(init_state(separating_pair), 0, "+")
    with pytest.raises(AlreadySelectedError):
        branch_masses(state, 0)


def test_compatible_set_and_posterior() -> None:
    inst = OdtnInstance.from_rows(["+*", "+-"])
    state = apply_observation(init_state(inst), 0, "+")
    assert compatible_set(state) == {0, 1}
    assert state.stars_seen == (0, 1)
    assert posterior(state) == (Fraction(2, 3), Fraction(1, 3))


def test_contradicted_hypothesis_leaves_compatible_set(balanced_four: OdtnInstance) -> None:
    state = apply_observation(init_state(balanced_four), 0, "-")
    assert 0 not in compatible_set(state)


def test_all_dead_state() -> None:
    inst = OdtnInstance.from_rows(["+-", "+-"])
    state = replay(inst, [(0, "+"), (1, "-")])
    with pytest.raises(InconsistentObservationsError):
        compatible_set(state)
    with pytest.raises(InconsistentObservationsError):
        posterior(state)


def test_outcome_of(balanced_four: OdtnInstance) -> None:
    state = replay(balanced_four, [(1, "-")])
    assert state.outcome_of(1) == "-"
    assert state.outcome_of(0) is None


def test_all_covered_stop_rule(balanced_four: OdtnInstance) -> None:
    rule = AllCovered()
    state = init_state(balanced_four)
    assert not rule.done(state)
    assert tuple(rule.paying(state)) == (0, 1, 2, 3)
    state = replay(balanced_four, [(0, "+"), (1, "-")])
    assert rule.done(state)
    assert tuple(rule.paying(state)) == ()


def test_expansion_total_mass(noisy_three: OdtnInstance) -> None:
    scenarios = list(expanded_scenarios(noisy_three))
    assert len(scenarios) == 4
    assert sum(s.mass for s in scenarios) == 1


def test_compact_state_matches_enumeration() -> None:
    rng = random.Random(11)
    for inst in identifiable_corpus(seed=5, count=25, star_rate=0.35):
        for state in random_walk(inst, rng):
            counts = tuple(state.count(i) for i in range(inst.m))
            assert counts == naive_counts(state)
            assert posterior(state) == naive_posterior(state)
