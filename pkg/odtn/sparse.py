"""Identification on sparse high-noise instances.

The greedy phase picks the test splitting the most alive hypotheses and tracks,
per hypothesis, how many greedy tests answered ``*`` for it. At greedy steps
1, 2, 4, ... a membership check asks whether the truth is among the least
noisy alive hypotheses, and stops the run early when it is.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from odtn.adaptive import OutcomeOracle
from odtn.diagnostics import separates, uncertainty_stats
from odtn.errors import (
    DegenerateInstanceError,
    DomainError,
    IdentifiabilityError,
    InconsistentObservationsError,
    StoppingUnreachableError,
)
from odtn.models import STAR, MemberVerdict, Observation, OdtnInstance, Transcript

logger = logging.getLogger(__name__)

NAME = "sparse"


@dataclass
class SparseRunState:
    alive: frozenset[int]
    weights: list[int]
    t: int = 0
    steps: list[Observation] = field(default_factory=list)
    known: dict[int, str] = field(default_factory=dict)
    greedy_tests: list[int] = field(default_factory=list)
    member_calls: int = 0
    identified: int | None = None
    stop: str = ""


def split_score(inst: OdtnInstance, alive: frozenset[int], e: int) -> Fraction:
    """Deterministic alive hypotheses on e, averaged over the outcomes."""
    return Fraction(sum(len(inst.side(e, o) & alive) for o in inst.outcomes), inst.outcomes.size)


def _splits(inst: OdtnInstance, e: int, pool: set[int]) -> bool:
    present = {inst.response(j, e) for j in pool} - {STAR}
    return len(present) >= 2


class _Observer:
    """Asks the oracle and remembers every answer for the rest of the run."""

    def __init__(
        self,
        inst: OdtnInstance,
        oracle: OutcomeOracle,
        known: dict[int, str],
        steps: list[Observation] | None = None,
    ) -> None:
        self.inst = inst
        self.oracle = oracle
        self.known = known
        self.steps: list[Observation] = [] if steps is None else steps

    def observe(self, e: int) -> str:
        if e in self.known:
            return self.known[e]
        o = self.oracle.answer(e)
        if o not in self.inst.outcomes:
            raise DomainError(f"oracle answered {o!r} for test {e}")
        self.known[e] = o
        self.steps.append((e, o))
        return o

    def unused(self) -> list[int]:
        return [e for e in range(self.inst.n) if e not in self.known]

    def consistent(self, j: int) -> bool:
        return self.inst.consistent(j, self.known.items())


def member(
    inst: OdtnInstance,
    candidates: set[int] | frozenset[int] | list[int],
    oracle: OutcomeOracle,
    known: dict[int, str] | None = None,
) -> MemberVerdict:
    """Decide whether the true hypothesis lies in ``candidates``.

    ``known`` holds outcomes already observed in this run; they are never
    asked again and count as evidence. Returns the identified hypothesis or
    a verdict with ``identified=None`` when the truth is outside the set.
    """
    observer = _Observer(inst, oracle, dict(known or {}))
    log_m = math.log2(inst.m) if inst.m > 1 else 0.0

    def verdict(identified: int | None, phases: tuple[int, int, int]) -> MemberVerdict:
        logger.debug(
            "member(%s) -> %s after %d tests", sorted(candidates), identified, len(observer.steps)
        )
        return MemberVerdict(identified, tuple(observer.steps), phases)

    pool = {j for j in candidates if observer.consistent(j)}
    phase1 = 0
    while len(pool) >= 2:
        test = next((e for e in observer.unused() if _splits(inst, e, pool)), None)
        if test is None:
            for i, j in itertools.combinations(sorted(pool), 2):
                if not separates(inst, i, j):
                    raise IdentifiabilityError(f"hypotheses {i} and {j} have no separating test")
            break
        o = observer.observe(test)
        pool = {j for j in pool if inst.response(j, test) in (o, STAR)}
        phase1 += 1
    if not pool:
        return verdict(None, (phase1, 0, 0))
    z = min(pool)

    rivals = {j for j in range(inst.m) if j != z and observer.consistent(j)}
    budget = math.ceil(4 * log_m)
    witnesses: list[int] = []
    while rivals and len(witnesses) < budget:
        test = next((e for e in observer.unused() if inst.response(z, e) != STAR), None)
        if test is None:
            break
        o = observer.observe(test)
        witnesses.append(test)
        if o != inst.response(z, test):
            return verdict(None, (phase1, len(witnesses), 0))
        rivals = {j for j in rivals if inst.response(j, test) in (o, STAR)}
    if not rivals:
        return verdict(z, (phase1, len(witnesses), 0))

    limit = 2 * log_m
    duelists = sorted(
        j for j in rivals if sum(inst.response(j, e) == STAR for e in witnesses) <= limit
    )
    duels = 0
    for j in duelists:
        test = next(
            (
                e
                for e in observer.unused()
                if STAR not in (inst.response(z, e), inst.response(j, e))
                and inst.response(z, e) != inst.response(j, e)
            ),
            None,
        )
        if test is None:
            continue
        duels += 1
        if observer.observe(test) != inst.response(z, test):
            return verdict(None, (phase1, len(witnesses), duels))
    return verdict(z, (phase1, len(witnesses), duels))


def candidate_size(inst: OdtnInstance, alpha: float | None = None) -> int:
    """ceil(2 m^alpha); alpha defaults to the instance's own sparsity exponent."""
    if alpha is None:
        return 2 * max(uncertainty_stats(inst).max_side, 1)
    return max(1, math.ceil(2 * inst.m**alpha - 1e-9))


def _is_power_of_two(t: int) -> bool:
    return t > 0 and t & (t - 1) == 0


def sparse_search(
    inst: OdtnInstance, oracle: OutcomeOracle, alpha: float | None = None
) -> SparseRunState:
    """Greedy splitting with membership checks at greedy steps 1, 2, 4, ...

    Returns the final run state; ``identified`` and ``stop`` say how it ended.
    """
    if inst.m < 2:
        raise DegenerateInstanceError(f"sparse identification needs m >= 2, got {inst.m}")
    size = candidate_size(inst, alpha)
    run = SparseRunState(alive=frozenset(range(inst.m)), weights=[0] * inst.m)
    observer = _Observer(inst, oracle, run.known, run.steps)

    while len(run.alive) > 1:
        if _is_power_of_two(run.t):
            ranked = sorted(run.alive, key=lambda i: (run.weights[i], i))
            found = member(inst, ranked[: min(len(ranked), size)], oracle, run.known)
            run.member_calls += 1
            for e, o in found.steps:
                run.known[e] = o
                observer.steps.append((e, o))
            if found.identified is not None:
                run.identified, run.stop = found.identified, "member"
                return run

        remaining = [e for e in range(inst.n) if e not in run.greedy_tests]
        if not remaining:
            raise StoppingUnreachableError(f"{len(run.alive)} hypotheses left and no tests")
        test = max(remaining, key=lambda e: (split_score(inst, run.alive, e), -e))
        o = observer.observe(test)
        run.greedy_tests.append(test)
        run.alive = frozenset(i for i in run.alive if inst.response(i, test) in (o, STAR))
        for i in inst.star_side(test):
            run.weights[i] += 1
        run.t += 1
        logger.debug("greedy step %d: test %d -> %s, %d alive", run.t, test, o, len(run.alive))

    if not run.alive:
        raise InconsistentObservationsError("every hypothesis was contradicted")
    run.identified, run.stop = next(iter(run.alive)), "survivor"
    return run


def run_sparse(
    inst: OdtnInstance,
    oracle: OutcomeOracle,
    seed: int | None = None,
    alpha: float | None = None,
) -> Transcript:
    run = sparse_search(inst, oracle, alpha)
    assert run.identified is not None
    return Transcript(
        steps=tuple(run.steps),
        verdict=(run.identified,),
        policy=NAME,
        identified=run.identified,
        seed=seed,
        stop=run.stop,
        detail={"greedy_steps": run.t, "member_calls": run.member_calls},
    )


class SparsePolicy:
    """History-dependent policy wrapper around ``run_sparse``."""

    name = NAME

    def __init__(self, inst: OdtnInstance, alpha: float | None = None) -> None:
        self.instance = inst
        self.alpha = alpha

    def run(self, oracle: OutcomeOracle, seed: int | None = None) -> Transcript:
        return run_sparse(self.instance, oracle, seed, self.alpha)
