"""Seeded corpus of tiny random instances for cross-checks."""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterator

from odtn.diagnostics import check_identifiability
from odtn.models import STAR, OdtnInstance
from odtn.state import BeliefState, apply_observation, init_state

SYMBOLS = ("+", "-")


def random_instance(rng: random.Random, m: int, n: int, star_rate: float) -> OdtnInstance:
    rows = [
        "".join(STAR if rng.random() < star_rate else rng.choice(SYMBOLS) for _ in range(m))
        for _ in range(n)
    ]
    return OdtnInstance.from_rows(rows)


def identifiable_corpus(
    seed: int,
    count: int,
    m_range: tuple[int, int] = (3, 5),
    n_range: tuple[int, int] = (3, 5),
    star_rate: float = 0.2,
) -> list[OdtnInstance]:
    """``count`` identifiable instances; sizes drawn uniformly from the inclusive ranges."""
    rng = random.Random(seed)
    found: list[OdtnInstance] = []
    for _ in range(count * 200):
        inst = random_instance(rng, rng.randint(*m_range), rng.randint(*n_range), star_rate)
        if check_identifiability(inst).identifiable:
            found.append(inst)
            if len(found) == count:
                return found
    raise RuntimeError(f"could not draw {count} identifiable instances")


def random_walk(inst: OdtnInstance, rng: random.Random) -> Iterator[BeliefState]:
    """States along one truthful run: a random truth, random test order, random star draws."""
    truth = rng.randrange(inst.m)
    state = init_state(inst)
    yield state
    order = list(range(inst.n))
    rng.shuffle(order)
    for e in order:
        label = inst.response(truth, e)
        o = rng.choice(SYMBOLS) if label == STAR else label
        state = apply_observation(state, e, o)
        yield state



def resolutions(inst: OdtnInstance, truth: int) -> Iterator[list[str]]:
    """Every full outcome vector the truth can produce."""
    noisy = [e for e in range(inst.n) if inst.response(truth, e) == STAR]
    for draw in itertools.product(inst.outcomes.symbols, repeat=len(noisy)):
        outcomes = [inst.response(truth, e) for e in range(inst.n)]
        for e, o in zip(noisy, draw):
            outcomes[e] = o
        yield outcomes
