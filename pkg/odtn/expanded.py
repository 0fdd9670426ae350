"""Brute-force enumeration of expanded scenarios.

An expanded scenario pairs a hypothesis with one full resolution of its star
entries. Everything here is exponential in the star count and exists to check
the compact belief-state arithmetic against first principles.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction

from odtn.coverage import as_asrn
from odtn.errors import EnumerationInfeasibleError
from odtn.models import STAR, AsrnInstance, Observation, Problem
from odtn.settings import DEFAULT_CAPS
from odtn.state import BeliefState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpandedScenario:
    scenario: int
    outcomes: tuple[str, ...]
    mass: Fraction

    def consistent(self, observed: tuple[Observation, ...]) -> bool:
        return all(self.outcomes[e] == o for e, o in observed)

    def pairs(self, elements: tuple[int, ...]) -> tuple[Observation, ...]:
        return tuple((e, self.outcomes[e]) for e in elements)


def expand(
    asrn: AsrnInstance, i: int, cap: int = DEFAULT_CAPS.enumeration_cap
) -> Iterator[ExpandedScenario]:
    """Every resolution of scenario i's star entries, each with mass pi_i / |Omega|^c_i."""
    table = asrn.table
    base = [table.response(i, e) for e in range(table.n)]
    star_tests = [e for e, label in enumerate(base) if label == STAR]
    if len(star_tests) > cap:
        raise EnumerationInfeasibleError(
            f"scenario {i} has {len(star_tests)} star entries, cap is {cap}"
        )
    mass = table.prior[i] / table.outcomes.size ** len(star_tests)
    for resolution in itertools.product(table.outcomes.symbols, repeat=len(star_tests)):
        vector = list(base)
        for e, o in zip(star_tests, resolution):
            vector[e] = o
        yield ExpandedScenario(i, tuple(vector), mass)


def expanded_scenarios(
    problem: Problem, cap: int = DEFAULT_CAPS.enumeration_cap
) -> Iterator[ExpandedScenario]:
    asrn = as_asrn(problem)
    for i in range(asrn.m):
        yield from expand(asrn, i, cap)


def _live(state: BeliefState, cap: int) -> Iterator[ExpandedScenario]:
    for scenario in expanded_scenarios(state.instance, cap):
        if scenario.consistent(state.selected):
            yield scenario


def naive_counts(state: BeliefState, cap: int = DEFAULT_CAPS.enumeration_cap) -> tuple[int, ...]:
    """n_i by direct count of consistent resolutions."""
    counts = [0] * state.instance.m
    for scenario in _live(state, cap):
        counts[scenario.scenario] += 1
    return tuple(counts)


def naive_posterior(
    state: BeliefState, cap: int = DEFAULT_CAPS.enumeration_cap
) -> tuple[Fraction, ...]:
    weights = [Fraction(0)] * state.instance.m
    for scenario in _live(state, cap):
        weights[scenario.scenario] += scenario.mass
    total = sum(weights)
    return tuple(w / total for w in weights)


def _uncovered(state: BeliefState, cap: int) -> Iterator[tuple[ExpandedScenario, Fraction]]:
    elements = tuple(e for e, _ in state.selected)
    for scenario in _live(state, cap):
        before = state.instance.coverage[scenario.scenario].value(scenario.pairs(elements))
        if before < 1:
            yield scenario, before


def naive_first_term(
    state: BeliefState, e: int, cap: int = DEFAULT_CAPS.enumeration_cap
) -> Fraction:
    """Mass of uncovered consistent resolutions outside the most populous branch of e."""
    symbols = state.instance.outcomes.symbols
    counts = dict.fromkeys(symbols, 0)
    masses = dict.fromkeys(symbols, Fraction(0))
    for scenario, _ in _uncovered(state, cap):
        counts[scenario.outcomes[e]] += 1
        masses[scenario.outcomes[e]] += scenario.mass
    largest = max(symbols, key=lambda o: (counts[o], -symbols.index(o)))
    return sum(masses.values(), Fraction(0)) - masses[largest]


def naive_second_term(
    state: BeliefState, e: int, cap: int = DEFAULT_CAPS.enumeration_cap
) -> Fraction:
    """Sum over uncovered consistent resolutions of mass times truncated gain."""
    total = Fraction(0)
    for scenario, before in _uncovered(state, cap):
        cover = state.instance.coverage[scenario.scenario]
        after = cover.value(state.selected + ((e, scenario.outcomes[e]),))
        total += scenario.mass * (after - before) / (1 - before)
    return total
