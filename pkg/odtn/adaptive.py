"""Adaptive greedy policies.

Both scores add a pruning term to the expected normalized coverage gain.
``score_c`` prunes everything outside the outcome branch holding the most
expanded scenarios; ``score_r`` prunes everything outside the largest
deterministic part of the original scenarios. ``choose_variant`` picks
between them from the instance's column and row uncertainty.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from enum import Enum
from fractions import Fraction
from typing import Protocol

from odtn.coverage import as_asrn
from odtn.diagnostics import uncertainty_stats
from odtn.errors import DomainError, StoppingUnreachableError, TerminalStateError
from odtn.models import (
    STAR,
    AsrnInstance,
    OdtnInstance,
    Problem,
    ScoreBreakdown,
    Transcript,
)
from odtn.state import (
    AllCovered,
    BeliefState,
    StopRule,
    apply_observation,
    branch_masses,
    compatible_set,
    init_state,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


class Variant(str, Enum):
    SCORE_C = "adaptive-c"
    SCORE_R = "adaptive-r"


class OutcomeOracle(Protocol):
    def answer(self, element: int) -> str: ...


class Policy(Protocol):
    """Anything the harness can run against an oracle."""

    name: str

    def run(self, oracle: OutcomeOracle, seed: int | None = None) -> Transcript: ...


def second_term(state: BeliefState, e: int) -> Fraction:
    """Expected normalized coverage gain of e over the active scenarios."""
    table = state.instance.table
    symbols = table.outcomes.symbols
    total = ZERO
    for i in state.active:
        cover = state.instance.coverage[i]
        before = state.values[i]
        label = table.response(i, e)
        if label == STAR:
            after = sum((cover.value(state.selected + ((e, o),)) for o in symbols), ZERO)
            after /= len(symbols)
        else:
            after = cover.value(state.selected + ((e, label),))
        total += state.mass(i) * (after - before) / (1 - before)
    return total


def odtn_second_term(state: BeliefState, e: int) -> Fraction:
    """Closed form for elimination coverage: expected newly eliminated share of A.

    A hypothesis answering o deterministically eliminates every compatible
    hypothesis answering some other outcome; a star hypothesis does so on
    average over the outcomes.
    """
    compatible = state.compatible
    if len(compatible) <= 1:
        raise TerminalStateError(f"{len(compatible)} compatible hypotheses left")
    table = state.instance.table
    k = table.outcomes.size
    sizes = {o: len(table.side(e, o) & compatible) for o in table.outcomes}
    deterministic = sum(sizes.values())
    total = ZERO
    for i in compatible:
        label = table.response(i, e)
        if label == STAR:
            newly = Fraction(deterministic * (k - 1), k)
        else:
            newly = Fraction(deterministic - sizes[label])
        total += state.mass(i) * newly
    return total / (len(compatible) - 1)


def _gain(state: BeliefState, e: int, closed_form: bool | None) -> Fraction:
    if closed_form is None:
        closed_form = state.instance.coverage_family == "elimination"
    return odtn_second_term(state, e) if closed_form else second_term(state, e)


def score_c(state: BeliefState, e: int, *, closed_form: bool | None = None) -> ScoreBreakdown:
    stats = branch_masses(state, e)
    symbols = state.instance.outcomes.symbols
    largest = max(symbols, key=lambda o: (stats.count[o], -symbols.index(o)))
    first = sum(stats.mass.values(), ZERO) - stats.mass[largest]
    return ScoreBreakdown(first, _gain(state, e, closed_form))


def score_r(state: BeliefState, e: int, *, closed_form: bool | None = None) -> ScoreBreakdown:
    table = state.instance.table
    symbols = table.outcomes.symbols
    k = len(symbols)
    parts: dict[str, list[int]] = {o: [] for o in symbols}
    stars: list[int] = []
    for i in state.active:
        label = table.response(i, e)
        (stars if label == STAR else parts[label]).append(i)
    largest = max(symbols, key=lambda o: (len(parts[o]), -symbols.index(o)))
    first = sum(
        (state.mass(i) for o in symbols if o != largest for i in parts[o]),
        ZERO,
    )
    first += Fraction(k - 1, k) * sum((state.mass(i) for i in stars), ZERO)
    return ScoreBreakdown(first, _gain(state, e, closed_form))


SCORERS: dict[Variant, Callable[..., ScoreBreakdown]] = {
    Variant.SCORE_C: score_c,
    Variant.SCORE_R: score_r,
}


def choose_variant(inst: OdtnInstance) -> Variant:
    """Score_r when c log2|Omega| exceeds r, else Score_c."""
    stats = uncertainty_stats(inst)
    if stats.c * math.log2(inst.outcomes.size) > stats.r:
        return Variant.SCORE_R
    return Variant.SCORE_C


def advance(state: BeliefState, e: int, oracle: OutcomeOracle) -> BeliefState:
    """Ask the oracle about e and fold the answer into the state."""
    o = oracle.answer(e)
    if o not in state.instance.outcomes:
        legal = list(state.instance.outcomes)
        raise DomainError(f"oracle answered {o!r} for element {e}, expected one of {legal}")
    state = apply_observation(state, e, o)
    compatible_set(state)
    return state


class StatePolicy(ABC):
    """A policy whose next element depends on the belief state alone."""

    name: str = "policy"

    def __init__(self, problem: Problem, stop: StopRule | None = None) -> None:
        self.instance: AsrnInstance = as_asrn(problem)
        self.stop: StopRule = stop or AllCovered()

    def start(self) -> BeliefState:
        return init_state(self.instance)

    @abstractmethod
    def next(self, state: BeliefState) -> int | None:
        """The element to observe next, or None once the stop rule holds."""

    def run(self, oracle: OutcomeOracle, seed: int | None = None) -> Transcript:
        state = self.start()
        while (e := self.next(state)) is not None:
            state = advance(state, e, oracle)
            logger.debug("%s: observed %s on element %d", self.name, state.selected[-1][1], e)
        return self.conclude(state, seed)

    def conclude(self, state: BeliefState, seed: int | None = None) -> Transcript:
        verdict = tuple(sorted(state.compatible))
        return Transcript(
            steps=state.selected,
            verdict=verdict,
            policy=self.name,
            identified=verdict[0] if len(verdict) == 1 else None,
            seed=seed,
            stop=self.stop.name,
        )

    def unselected(self, state: BeliefState) -> list[int]:
        return [e for e in range(self.instance.n) if e not in state.selected_elements]


class GreedyPolicy(StatePolicy):
    """Pick the unselected element with the highest score; ties go to the lowest index."""

    def __init__(
        self,
        problem: Problem,
        variant: Variant = Variant.SCORE_C,
        stop: StopRule | None = None,
    ) -> None:
        super().__init__(problem, stop)
        self.variant = variant
        self.name = variant.value

    def next(self, state: BeliefState) -> int | None:
        if self.stop.done(state):
            return None
        candidates = self.unselected(state)
        if not candidates:
            raise StoppingUnreachableError("every element observed but the stop rule does not hold")
        scorer = SCORERS[self.variant]
        scores = {e: scorer(state, e).total for e in candidates}
        return max(candidates, key=lambda e: (scores[e], -e))


class PermutationPolicy(StatePolicy):
    """Replay a fixed ranking, stopping once the stop rule holds."""

    def __init__(
        self,
        problem: Problem,
        order: Sequence[int],
        name: str = "nonadaptive",
        stop: StopRule | None = None,
    ) -> None:
        super().__init__(problem, stop)
        self.order = tuple(order)
        self.name = name

    def next(self, state: BeliefState) -> int | None:
        if self.stop.done(state):
            return None
        for e in self.order:
            if e not in state.selected_elements:
                return e
        raise StoppingUnreachableError("ranking exhausted before the stop rule held")


def run_adaptive(
    problem: Problem,
    variant: Variant,
    oracle: OutcomeOracle,
    stop_rule: StopRule | None = None,
    seed: int | None = None,
) -> Transcript:
    return GreedyPolicy(problem, variant, stop_rule).run(oracle, seed)
