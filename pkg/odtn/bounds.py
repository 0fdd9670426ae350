"""Exact optima and lower bounds on expected cost."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Hashable
from fractions import Fraction
from functools import lru_cache

from odtn.adaptive import StatePolicy
from odtn.coverage import as_asrn, is_elimination_family
from odtn.diagnostics import max_side
from odtn.errors import (
    DegenerateInstanceError,
    EnumerationInfeasibleError,
    StoppingUnreachableError,
)
from odtn.models import STAR, BoundsReport, OdtnInstance, Problem
from odtn.nonadaptive import permutation_cost
from odtn.settings import DEFAULT_CAPS, Caps
from odtn.state import AllCovered, BeliefState, StopRule, apply_observation

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def _state_key(state: BeliefState, elimination: bool) -> Hashable:
    if elimination:
        return state.selected_elements, state.compatible
    return frozenset(state.selected)


class OptimalPolicy(StatePolicy):
    """Replays the decisions of the exact dynamic program."""

    name = "opt"

    def __init__(
        self, problem: Problem, stop: StopRule | None = None, caps: Caps = DEFAULT_CAPS
    ) -> None:
        super().__init__(problem, stop)
        if self.instance.n > caps.dp_max_tests:
            raise EnumerationInfeasibleError(
                f"{self.instance.n} tests exceed the DP limit of {caps.dp_max_tests}"
            )
        self.caps = caps
        self._elimination = is_elimination_family(self.instance)
        self._memo: dict[Hashable, tuple[Fraction | None, int | None]] = {}
        self.cost = self._solve(self.start())
        logger.info("optimal policy: %d states, cost %s", len(self._memo), self.cost)

    @property
    def states(self) -> int:
        return len(self._memo)

    def _solve(self, state: BeliefState) -> Fraction | None:
        key = _state_key(state, self._elimination)
        if key in self._memo:
            return self._memo[key][0]
        if self.stop.done(state):
            self._memo[key] = (ZERO, None)
            return ZERO
        if len(self._memo) >= self.caps.dp_max_states:
            raise EnumerationInfeasibleError(f"DP exceeded {self.caps.dp_max_states} states")

        best: Fraction | None = None
        choice: int | None = None
        for e in self.unselected(state):
            total = ZERO
            feasible = True
            for o in self.instance.outcomes:
                child = apply_observation(state, e, o)
                if not child.compatible:
                    continue
                value = self._solve(child)
                if value is None:
                    feasible = False
                    break
                total += value
            if feasible and (best is None or total < best):
                best, choice = total, e

        if best is None:
            self._memo[key] = (None, None)
            return None
        paying = sum((state.mass(i) for i in self.stop.paying(state)), ZERO)
        self._memo[key] = (paying + best, choice)
        return paying + best

    def next(self, state: BeliefState) -> int | None:
        if self.stop.done(state):
            return None
        key = _state_key(state, self._elimination)
        if key not in self._memo:
            self._solve(state)
        choice = self._memo[key][1]
        if choice is None:
            raise StoppingUnreachableError("no element sequence reaches the stop rule from here")
        return choice


def optimal_policy_cost(
    problem: Problem, stop: StopRule | None = None, caps: Caps = DEFAULT_CAPS
) -> OptimalPolicy:
    """Exact optimum of expected cost; ``policy.cost`` is None when the stop rule is unreachable."""
    return OptimalPolicy(problem, stop or AllCovered(), caps)


def opt_ssc_exact(inst: OdtnInstance, i: int, caps: Caps = DEFAULT_CAPS) -> Fraction | None:
    """Optimal expected cost of eliminating every other hypothesis when i is true.

    Tests may be repeated and a star entry draws a fresh outcome each time, so
    a test whose drawn outcome eliminates nothing new loops back to the same
    state. Returns None when some hypothesis can never be eliminated.
    """
    if inst.m > caps.ssc_max_m:
        raise EnumerationInfeasibleError(f"m={inst.m} exceeds the SSC limit of {caps.ssc_max_m}")
    others = [j for j in range(inst.m) if j != i]
    bit = {j: 1 << pos for pos, j in enumerate(others)}
    symbols = inst.outcomes.symbols

    def mask(members: frozenset[int]) -> int:
        return sum(bit[j] for j in members if j != i)

    branches: list[list[tuple[Fraction, int]]] = []
    for e in range(inst.n):
        label = inst.response(i, e)
        outcomes = symbols if label == STAR else (label,)
        share = Fraction(1, len(outcomes))
        branches.append([(share, mask(inst.eliminated_by(e, o))) for o in outcomes])

    @lru_cache(maxsize=None)
    def value(remaining: int) -> Fraction | None:
        if remaining == 0:
            return ZERO
        best: Fraction | None = None
        for branch in branches:
            stay = ZERO
            rest = ZERO
            feasible = True
            for share, removed in branch:
                after = remaining & ~removed
                if after == remaining:
                    stay += share
                    continue
                child = value(after)
                if child is None:
                    feasible = False
                    break
                rest += share * child
            if not feasible or stay == 1:
                continue
            candidate = (1 + rest) / (1 - stay)
            if best is None or candidate < best:
                best = candidate
        return best

    return value((1 << len(others)) - 1)


def ssc_lower_bound(inst: OdtnInstance, caps: Caps = DEFAULT_CAPS) -> Fraction | None:
    total = ZERO
    for i in range(inst.m):
        if inst.prior[i] == 0:
            continue
        component = opt_ssc_exact(inst, i, caps)
        if component is None:
            return None
        total += inst.prior[i] * component
    return total


def entropy_lower_bound(inst: OdtnInstance) -> float:
    """Shannon entropy of the prior in base |Omega|."""
    scale = math.log2(inst.outcomes.size)
    bits = sum(-float(p) * math.log2(p) for p in inst.prior if p > 0)
    return bits / scale if scale > 0 else 0.0


def sparsity_lower_bound(inst: OdtnInstance) -> int:
    """ceil((m-1) / largest per-outcome elimination set)."""
    if inst.m < 2:
        raise DegenerateInstanceError(f"sparsity bound needs m >= 2, got {inst.m}")
    largest = max(
        (len(inst.eliminated_by(e, o)) for e in range(inst.n) for o in inst.outcomes),
        default=0,
    )
    if largest == 0:
        raise DegenerateInstanceError("no test eliminates any hypothesis")
    return math.ceil(Fraction(inst.m - 1, largest))


def brute_force_nonadaptive_opt(
    problem: Problem, caps: Caps = DEFAULT_CAPS
) -> tuple[Fraction, tuple[int, ...]]:
    asrn = as_asrn(problem)
    if asrn.n > caps.brute_force_max_n:
        raise EnumerationInfeasibleError(
            f"{asrn.n} tests exceed the permutation limit of {caps.brute_force_max_n}"
        )
    best: tuple[Fraction, tuple[int, ...]] | None = None
    for order in itertools.permutations(range(asrn.n)):
        cost = permutation_cost(asrn, order, caps.enumeration_cap)
        if best is None or cost < best[0]:
            best = (cost, order)
    assert best is not None
    return best


def compute_bounds(
    inst: OdtnInstance, caps: Caps = DEFAULT_CAPS, stop: StopRule | None = None
) -> BoundsReport:
    """Every bound that fits within the caps; the rest stay None."""
    report = BoundsReport(
        entropy_lb=entropy_lower_bound(inst),
        sparsity_lb=sparsity_lower_bound(inst) if inst.m >= 2 and max_side(inst) else None,
    )
    try:
        optimal = optimal_policy_cost(inst, stop, caps)
        report.opt_adaptive, report.dp_states = optimal.cost, optimal.states
    except EnumerationInfeasibleError as e:
        logger.info("adaptive optimum skipped: %s", e)
    try:
        report.ssc_lb = ssc_lower_bound(inst, caps)
    except EnumerationInfeasibleError as e:
        logger.info("SSC bound skipped: %s", e)
    try:
        cost, order = brute_force_nonadaptive_opt(inst, caps)
        report.opt_nonadaptive, report.opt_nonadaptive_order = cost, order
    except EnumerationInfeasibleError as e:
        logger.info("non-adaptive optimum skipped: %s", e)
    return report
