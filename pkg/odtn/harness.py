"""Running policies against oracles and measuring what they cost."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from rich.console import Console
from rich.prompt import Prompt
from scipy import stats

from odtn.adaptive import (
    GreedyPolicy,
    OutcomeOracle,
    PermutationPolicy,
    Policy,
    StatePolicy,
    Variant,
    choose_variant,
)
from odtn.bounds import optimal_policy_cost
from odtn.coverage import as_asrn
from odtn.errors import DomainError, EnumerationInfeasibleError, SessionAborted, UsageError
from odtn.models import STAR, AsrnInstance, OdtnInstance, Problem, Transcript
from odtn.nonadaptive import build_permutation, merge_tiny_priors
from odtn.nonident import Criterion, NonIdentPolicy
from odtn.settings import DEFAULT_CAPS, Caps
from odtn.sparse import SparsePolicy
from odtn.state import BeliefState, apply_observation

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


class SimulatedOracle:
    """Answers for a fixed true hypothesis; star entries are drawn once and remembered."""

    def __init__(self, inst: OdtnInstance, truth: int, rng: np.random.Generator) -> None:
        self.inst = inst
        self.truth = truth
        self.rng = rng
        self._answers: dict[int, str] = {}

    def answer(self, element: int) -> str:
        if element not in self._answers:
            label = self.inst.response(self.truth, element)
            if label == STAR:
                symbols = self.inst.outcomes.symbols
                label = symbols[int(self.rng.integers(len(symbols)))]
            self._answers[element] = label
        return self._answers[element]


class ReplayOracle:
    """Answers from a full outcome vector."""

    def __init__(self, inst: OdtnInstance, outcomes: Sequence[str]) -> None:
        if len(outcomes) != inst.n:
            raise DomainError(f"outcome vector has {len(outcomes)} entries, expected {inst.n}")
        self.outcomes = tuple(outcomes)

    def answer(self, element: int) -> str:
        return self.outcomes[element]


class ScriptedOracle:
    """Resolves star queries from a script of outcome indices, then with the first outcome.

    Records the index given for every star query, so the exact evaluator can
    enumerate exactly the resolutions a deterministic policy reaches.
    """

    def __init__(self, inst: OdtnInstance, truth: int, script: Sequence[int]) -> None:
        self.inst = inst
        self.truth = truth
        self.script = list(script)
        self.used: list[int] = []
        self._answers: dict[int, str] = {}

    def answer(self, element: int) -> str:
        if element not in self._answers:
            label = self.inst.response(self.truth, element)
            if label == STAR:
                position = len(self.used)
                index = self.script[position] if position < len(self.script) else 0
                self.used.append(index)
                label = self.inst.outcomes.symbols[index]
            self._answers[element] = label
        return self._answers[element]


class InteractiveOracle:
    """Asks a person at the terminal; ``q`` aborts the session."""

    def __init__(
        self,
        inst: OdtnInstance,
        console: Console | None = None,
        ask: Callable[..., str] = Prompt.ask,
    ) -> None:
        self.inst = inst
        self.console = console or Console(stderr=True)
        self.ask = ask
        self._answers: dict[int, str] = {}

    def answer(self, element: int) -> str:
        if element in self._answers:
            return self._answers[element]
        choices = [*self.inst.outcomes.symbols, "q"]
        reply = self.ask(
            f"Outcome of [bold]{self.inst.name(element)}[/bold]",
            choices=choices,
            console=self.console,
        )
        if reply == "q":
            raise SessionAborted("session aborted by user")
        self._answers[element] = reply
        return reply


@dataclass(frozen=True)
class RunResult:
    cost: int
    transcript: Transcript
    correct: bool

    @property
    def verdict(self) -> tuple[int, ...]:
        return self.transcript.verdict


def simulate_run(
    problem: Problem,
    policy: Policy,
    truth: int,
    source: np.random.Generator | Sequence[str],
    seed: int | None = None,
) -> RunResult:
    inst = as_asrn(problem).table
    oracle: OutcomeOracle
    if isinstance(source, np.random.Generator):
        oracle = SimulatedOracle(inst, truth, source)
    else:
        oracle = ReplayOracle(inst, source)
    transcript = policy.run(oracle, seed)
    return RunResult(transcript.test_count, transcript, truth in transcript.verdict)


@dataclass(frozen=True)
class ExactEvaluation:
    cost: Fraction
    per_hypothesis: tuple[Fraction, ...]
    error_rate: Fraction
    runs: int


def exact_policy_cost(
    problem: Problem, policy: Policy, caps: Caps = DEFAULT_CAPS
) -> ExactEvaluation:
    """Exact expected cost over the prior and every star resolution the policy reaches."""
    asrn = as_asrn(problem)
    inst = asrn.table
    k = inst.outcomes.size
    worst = max(inst.star_counts, default=0)
    if worst > caps.enumeration_cap:
        raise EnumerationInfeasibleError(
            f"a hypothesis has {worst} star entries, cap is {caps.enumeration_cap}"
        )
    per_hypothesis = []
    cost = error = ZERO
    runs = 0
    for i in range(inst.m):
        expected = wrong = ZERO
        script: list[int] = []
        while True:
            oracle = ScriptedOracle(inst, i, script)
            transcript = policy.run(oracle)
            runs += 1
            weight = Fraction(1, k ** len(oracle.used))
            expected += weight * transcript.test_count
            if i not in transcript.verdict:
                wrong += weight
            script = _next_script(oracle.used, k)
            if not script:
                break
        per_hypothesis.append(expected)
        cost += inst.prior[i] * expected
        error += inst.prior[i] * wrong
    return ExactEvaluation(cost, tuple(per_hypothesis), error, runs)


def _next_script(used: list[int], k: int) -> list[int]:
    """Odometer step over the star answers actually consumed; empty when exhausted."""
    for position in range(len(used) - 1, -1, -1):
        if used[position] < k - 1:
            return [*used[:position], used[position] + 1]
    return []


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    halfwidth: float
    trials: int
    error_rate: float
    error_ci: tuple[float, float]


def monte_carlo_cost(
    problem: Problem, policy: Policy, trials: int, seed: int, workers: int = 1
) -> MonteCarloEstimate:
    """Seeded i.i.d. trials with a 95% normal halfwidth and an exact binomial error interval."""
    if trials < 1:
        raise UsageError(f"trials must be positive, got {trials}")
    if seed < 0:
        raise UsageError(f"seed must be non-negative, got {seed}")
    inst = as_asrn(problem).table
    probabilities = np.array([float(p) for p in inst.prior])
    probabilities /= probabilities.sum()

    def trial(child: np.random.SeedSequence) -> tuple[int, bool]:
        rng = np.random.default_rng(child)
        truth = int(rng.choice(inst.m, p=probabilities))
        result = simulate_run(problem, policy, truth, rng)
        return result.cost, result.correct

    children = np.random.SeedSequence(seed).spawn(trials)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(trial, children))

    costs = np.array([c for c, _ in outcomes], dtype=float)
    errors = sum(not ok for _, ok in outcomes)
    halfwidth = 0.0
    if trials > 1:
        halfwidth = float(stats.norm.ppf(0.975) * costs.std(ddof=1) / math.sqrt(trials))
    interval = stats.binomtest(errors, trials).proportion_ci(method="exact")
    return MonteCarloEstimate(
        mean=float(costs.mean()),
        halfwidth=halfwidth,
        trials=trials,
        error_rate=errors / trials,
        error_ci=(float(interval.low), float(interval.high)),
    )


@dataclass
class DecisionNode:
    state: BeliefState
    element: int | None = None
    children: dict[str, DecisionNode] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth for c in self.children.values())


def extract_tree(policy: StatePolicy) -> DecisionNode:
    """Unfold a state policy into its full decision tree."""

    def grow(state: BeliefState) -> DecisionNode:
        e = policy.next(state)
        node = DecisionNode(state, e)
        if e is None:
            return node
        for o in policy.instance.outcomes:
            child = apply_observation(state, e, o)
            if child.compatible:
                node.children[o] = grow(child)
        return node

    return grow(policy.start())


def tree_cost(node: DecisionNode, policy: StatePolicy) -> Fraction:
    """Sum over internal nodes of the mass still paying at that node."""
    if node.element is None:
        return ZERO
    paying = sum((node.state.mass(i) for i in policy.stop.paying(node.state)), ZERO)
    return paying + sum((tree_cost(c, policy) for c in node.children.values()), ZERO)


ALGORITHMS = (
    "nonadaptive",
    "adaptive-c",
    "adaptive-r",
    "meta",
    "sparse",
    "nonident-clique",
    "nonident-neighborhood",
    "opt",
)


def make_policy(
    algorithm: str,
    inst: OdtnInstance,
    *,
    seed: int | None = None,
    samples: int | None = None,
    exact: bool = False,
    caps: Caps = DEFAULT_CAPS,
    criterion: Criterion | None = None,
) -> Policy:
    """Build a policy by algorithm id."""
    if seed is not None and seed < 0:
        raise UsageError(f"seed must be non-negative, got {seed}")
    if algorithm == "nonadaptive":
        if seed is None and not exact:
            raise UsageError("nonadaptive ranking samples its scores and needs --seed")
        merged: AsrnInstance = merge_tiny_priors(inst)
        ranking = build_permutation(
            merged, seed, samples=samples, exact=exact, cap=caps.enumeration_cap
        )
        return PermutationPolicy(inst, ranking.permutation)
    if algorithm == "adaptive-c":
        return GreedyPolicy(inst, Variant.SCORE_C)
    if algorithm == "adaptive-r":
        return GreedyPolicy(inst, Variant.SCORE_R)
    if algorithm == "meta":
        return GreedyPolicy(inst, choose_variant(inst))
    if algorithm == "sparse":
        return SparsePolicy(inst)
    if algorithm.startswith("nonident-") and algorithm in ALGORITHMS:
        chosen = criterion or Criterion(algorithm.removeprefix("nonident-"))
        return NonIdentPolicy(inst, chosen)
    if algorithm == "opt":
        stop = None
        if criterion is not None:
            stop = NonIdentPolicy(inst, criterion).stop
        return optimal_policy_cost(inst, stop, caps)
    raise UsageError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")


def is_randomized(algorithm: str) -> bool:
    """Algorithms whose output depends on a seed beyond the oracle's star draws."""
    return algorithm == "nonadaptive"
