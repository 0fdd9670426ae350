"""Compact belief state over expanded scenarios.

A scenario's surviving resolutions are never enumerated: alive flags and the
count k_i of observed star entries are enough to recover n_i and p_i exactly.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Protocol

from odtn.coverage import as_asrn
from odtn.errors import AlreadySelectedError, DomainError, InconsistentObservationsError
from odtn.models import STAR, AsrnInstance, BranchStats, Observation, Problem


@dataclass(frozen=True)
class BeliefState:
    instance: AsrnInstance
    selected: tuple[Observation, ...]
    alive: tuple[bool, ...]
    stars_seen: tuple[int, ...]
    values: tuple[Fraction, ...]

    @cached_property
    def selected_elements(self) -> frozenset[int]:
        return frozenset(e for e, _ in self.selected)

    @property
    def covered(self) -> tuple[bool, ...]:
        return tuple(v >= 1 for v in self.values)

    @cached_property
    def compatible(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.alive) if a)

    @cached_property
    def active(self) -> tuple[int, ...]:
        """Alive scenarios whose coverage has not reached 1."""
        return tuple(i for i, a in enumerate(self.alive) if a and self.values[i] < 1)

    @property
    def all_covered(self) -> bool:
        return not self.active

    def count(self, i: int) -> int:
        """n_i as an exact integer."""
        if not self.alive[i]:
            return 0
        table = self.instance.table
        return table.outcomes.size ** (table.star_counts[i] - self.stars_seen[i])

    def mass(self, i: int) -> Fraction:
        """p_i = pi_i / |Omega|^k_i for alive scenarios."""
        if not self.alive[i]:
            return Fraction(0)
        return self.instance.prior[i] / self.instance.outcomes.size ** self.stars_seen[i]

    def outcome_of(self, e: int) -> str | None:
        for element, o in self.selected:
            if element == e:
                return o
        return None


def init_state(problem: Problem) -> BeliefState:
    asrn = as_asrn(problem)
    return BeliefState(
        instance=asrn,
        selected=(),
        alive=(True,) * asrn.m,
        stars_seen=(0,) * asrn.m,
        values=tuple(cover.value(()) for cover in asrn.coverage),
    )


def apply_observation(state: BeliefState, e: int, o: str) -> BeliefState:
    table = state.instance.table
    if e in state.selected_elements:
        raise AlreadySelectedError(f"element {e} already observed")
    if not 0 <= e < table.n:
        raise DomainError(f"element {e} out of range 0..{table.n - 1}")
    if o not in table.outcomes:
        raise DomainError(f"outcome {o!r} not in {list(table.outcomes)}")

    alive = list(state.alive)
    stars = list(state.stars_seen)
    for i, is_alive in enumerate(state.alive):
        if not is_alive:
            continue
        label = table.response(i, e)
        if label == STAR:
            stars[i] += 1
        elif label != o:
            alive[i] = False

    selected = state.selected + ((e, o),)
    values = tuple(
        state.instance.coverage[i].value(selected) if alive[i] else state.values[i]
        for i in range(table.m)
    )
    return BeliefState(state.instance, selected, tuple(alive), tuple(stars), values)


def replay(problem: Problem, steps: Iterable[Observation]) -> BeliefState:
    state = init_state(problem)
    for e, o in steps:
        state = apply_observation(state, e, o)
    return state


def branch_masses(state: BeliefState, e: int) -> BranchStats:
    """Mass and count per outcome of e over the active scenarios."""
    if e in state.selected_elements:
        raise AlreadySelectedError(f"element {e} already observed")
    table = state.instance.table
    k = table.outcomes.size
    mass = dict.fromkeys(table.outcomes.symbols, Fraction(0))
    count = dict.fromkeys(table.outcomes.symbols, 0)
    for i in state.active:
        label = table.response(i, e)
        if label == STAR:
            share, portion = state.mass(i) / k, state.count(i) // k
            for o in table.outcomes:
                mass[o] += share
                count[o] += portion
        else:
            mass[label] += state.mass(i)
            count[label] += state.count(i)
    return BranchStats(mass=mass, count=count)


def compatible_set(state: BeliefState) -> frozenset[int]:
    if not state.compatible:
        raise InconsistentObservationsError("no scenario is consistent with the observations")
    return state.compatible


def posterior(state: BeliefState) -> tuple[Fraction, ...]:
    masses = [state.mass(i) for i in range(state.instance.m)]
    total = sum(masses, Fraction(0))
    if total == 0:
        raise InconsistentObservationsError("no scenario is consistent with the observations")
    return tuple(p / total for p in masses)


class StopRule(Protocol):
    """When a run ends, and which scenarios pay for each test until then."""

    name: str

    def done(self, state: BeliefState) -> bool: ...

    def paying(self, state: BeliefState) -> Iterable[int]: ...


class AllCovered:
    """Stop once every alive scenario is covered."""

    name = "covered"

    def done(self, state: BeliefState) -> bool:
        return state.all_covered

    def paying(self, state: BeliefState) -> Iterable[int]:
        return state.active
