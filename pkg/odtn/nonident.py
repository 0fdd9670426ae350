"""Identification up to confusable hypotheses.

When some pairs of hypotheses have no deterministic separating test, a run
can only narrow the truth down to a small mutually confusable set. Two
hypotheses are adjacent in the similarity graph when nothing separates them
deterministically; a run stops once the compatible set is a clique of that
graph, or fits inside one closed neighborhood.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property

import networkx as nx

from odtn.adaptive import GreedyPolicy, OutcomeOracle, StatePolicy, advance, choose_variant
from odtn.coverage import EliminationCoverage, to_asrn
from odtn.errors import DegenerateInstanceError, StoppingUnreachableError
from odtn.models import STAR, Observation, OdtnInstance, Transcript
from odtn.state import BeliefState

logger = logging.getLogger(__name__)


class Criterion(str, Enum):
    UNIQUE = "unique"
    CLIQUE = "clique"
    NEIGHBORHOOD = "neighborhood"


@dataclass(frozen=True)
class SimilarityGraph:
    graph: nx.Graph

    @cached_property
    def max_degree(self) -> int:
        return max((degree for _, degree in self.graph.degree), default=0)

    def neighborhood(self, i: int) -> frozenset[int]:
        """Closed neighborhood D_i."""
        return frozenset(self.graph[i]) | {i}

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.graph.has_edge(i, j))


def similarity_graph(inst: OdtnInstance) -> SimilarityGraph:
    graph = nx.Graph()
    graph.add_nodes_from(range(inst.m))
    graph.add_edges_from(
        (i, j)
        for i, j in itertools.combinations(range(inst.m), 2)
        if j not in inst.separated_from[i]
    )
    return SimilarityGraph(graph)


def ftilde_value(inst: OdtnInstance, i: int, observed: Iterable[Observation], d: int) -> Fraction:
    """min(eliminated / (m - d - 1), 1)."""
    if inst.m <= d + 1:
        raise DegenerateInstanceError(f"m={inst.m} leaves nothing to eliminate with d={d}")
    return EliminationCoverage(inst, i, inst.m - d - 1).value(observed)


def stopping_satisfied(
    graph: SimilarityGraph, compatible: Iterable[int], criterion: Criterion
) -> bool:
    members = frozenset(compatible)
    if len(members) <= 1:
        return True
    if criterion is Criterion.UNIQUE:
        return False
    if criterion is Criterion.CLIQUE:
        return all(graph.adjacent(i, j) for i, j in itertools.combinations(members, 2))
    return any(members <= graph.neighborhood(i) for i in graph.graph.nodes)


def _splitting(inst: OdtnInstance, e: int, compatible: frozenset[int]) -> bool:
    present = {inst.response(j, e) for j in compatible} - {STAR}
    return len(present) >= 2


class CriterionStop:
    """Stop once the compatible set meets a similarity-graph criterion."""

    def __init__(self, graph: SimilarityGraph, criterion: Criterion) -> None:
        self.graph = graph
        self.criterion = criterion
        self.name = criterion.value

    def done(self, state: BeliefState) -> bool:
        return stopping_satisfied(self.graph, state.compatible, self.criterion)

    def paying(self, state: BeliefState) -> Iterable[int]:
        return sorted(state.compatible)


class NonIdentPolicy(StatePolicy):
    """Greedy on the rescaled coverage until at most d+1 remain, then split until stopping."""

    def __init__(
        self,
        inst: OdtnInstance,
        criterion: Criterion = Criterion.CLIQUE,
        graph: SimilarityGraph | None = None,
    ) -> None:
        self.table = inst
        self.graph = graph or similarity_graph(inst)
        self.d = self.graph.max_degree
        super().__init__(to_asrn(inst, "ftilde", d=self.d), CriterionStop(self.graph, criterion))
        self.criterion = criterion
        self.name = f"nonident-{criterion.value}"
        self.greedy = GreedyPolicy(self.instance, choose_variant(inst)) if inst.m >= 2 else None

    def next(self, state: BeliefState) -> int | None:
        if not state.all_covered and self.greedy is not None:
            return self.greedy.next(state)
        if self.stop.done(state):
            return None
        for e in self.unselected(state):
            if _splitting(self.table, e, state.compatible):
                return e
        raise StoppingUnreachableError(
            f"no test splits the compatible set {sorted(state.compatible)}"
        )

    def run(self, oracle: OutcomeOracle, seed: int | None = None) -> Transcript:
        state = self.start()
        phase1 = 0
        start_size: int | None = None
        while (e := self.next(state)) is not None:
            if start_size is None and state.all_covered:
                start_size = len(state.compatible)
            elif start_size is None:
                phase1 += 1
            state = advance(state, e, oracle)
        if start_size is None:
            start_size = len(state.compatible)
        detail = {
            "phase1_steps": phase1,
            "phase2_steps": len(state.selected) - phase1,
            "phase2_start_size": start_size,
        }
        return replace(self.conclude(state, seed), detail=detail)


def run_nonident(
    inst: OdtnInstance,
    criterion: Criterion,
    oracle: OutcomeOracle,
    seed: int | None = None,
) -> Transcript:
    return NonIdentPolicy(inst, criterion).run(oracle, seed)
