"""Non-adaptive ranking: one fixed test order for every scenario.

The order is built greedily from the expected truncated coverage gain. Exact
gains enumerate star resolutions; sampled gains draw scenarios from the prior
with seeded per-candidate streams so the result does not depend on scheduling.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction

import numpy as np

from odtn.coverage import as_asrn
from odtn.errors import DomainError, EnumerationInfeasibleError
from odtn.models import STAR, AsrnInstance, CoverageFunction, Observation, Problem, RankingResult
from odtn.settings import DEFAULT_CAPS

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def merge_tiny_priors(problem: Problem) -> AsrnInstance:
    """Fold every scenario with prior at most n^-2 into one dummy scenario.

    The dummy keeps the smallest merged index, its response column and its
    coverage function, and carries the merged mass. Other merged scenarios
    drop to prior zero so indices stay stable.
    """
    asrn = as_asrn(problem)
    n = asrn.n
    if n <= 1:
        return asrn
    threshold = Fraction(1, n * n)
    tiny = [i for i, p in enumerate(asrn.prior) if p <= threshold]
    if len(tiny) < 2:
        return asrn

    keep = tiny[0]
    prior = list(asrn.prior)
    prior[keep] = sum((asrn.prior[i] for i in tiny), ZERO)
    for i in tiny[1:]:
        prior[i] = ZERO
    logger.info("merged %d tiny scenarios into scenario %d (mass %s)", len(tiny), keep, prior[keep])

    return AsrnInstance(
        table=replace(asrn.table, prior=tuple(prior)),
        coverage=asrn.coverage,
        epsilon=asrn.epsilon,
        coverage_family=f"{asrn.coverage_family}+merged",
    )


def default_sample_count(m: int, n: int, epsilon: Fraction) -> int:
    """N = m^3 n^4 / epsilon."""
    return math.ceil(Fraction(m**3 * n**4) / epsilon)


def phase2_threshold(m: int, n: int, epsilon: Fraction) -> Fraction:
    return Fraction(1, 4 * m * m * n**4) * epsilon


def _truncated_gain(
    cover: CoverageFunction, before: tuple[Observation, ...], pair: Observation
) -> Fraction:
    start = cover.value(before)
    if start >= 1:
        return ZERO
    return (cover.value(before + (pair,)) - start) / (1 - start)


def _check_cap(asrn: AsrnInstance, cap: int) -> None:
    worst = max(asrn.table.star_counts, default=0)
    if worst > cap:
        raise EnumerationInfeasibleError(f"a scenario has {worst} star entries, cap is {cap}")


def _check_candidate(asrn: AsrnInstance, selected: Sequence[int], e: int) -> None:
    if not 0 <= e < asrn.n:
        raise DomainError(f"element {e} out of range")
    if e in selected:
        raise DomainError(f"element {e} is already in the ranking")


def exact_gain(
    problem: Problem, selected: Sequence[int], e: int, cap: int = DEFAULT_CAPS.enumeration_cap
) -> Fraction:
    """G_E(e) by enumerating the star entries of E and e for every scenario."""
    asrn = as_asrn(problem)
    _check_cap(asrn, cap)
    _check_candidate(asrn, selected, e)
    table = asrn.table
    symbols = table.outcomes.symbols
    elements = [*selected, e]
    total = ZERO
    for i in range(asrn.m):
        if asrn.prior[i] == 0:
            continue
        stars = [x for x in elements if table.response(i, x) == STAR]
        gain = ZERO
        for resolution in itertools.product(symbols, repeat=len(stars)):
            resolved = dict(zip(stars, resolution))
            before = tuple((x, resolved.get(x, table.response(i, x))) for x in selected)
            after = (e, resolved.get(e, table.response(i, e)))
            gain += _truncated_gain(asrn.coverage[i], before, after)
        total += asrn.prior[i] * gain / len(symbols) ** len(stars)
    return total


def sampled_gain(
    problem: Problem, selected: Sequence[int], e: int, samples: int, rng: np.random.Generator
) -> Fraction:
    """Exact mean of ``samples`` draws of the truncated gain, i ~ prior, stars uniform."""
    if samples < 1:
        raise DomainError(f"sample count must be positive, got {samples}")
    asrn = as_asrn(problem)
    _check_candidate(asrn, selected, e)
    table = asrn.table
    symbols = table.outcomes.symbols
    elements = [*selected, e]

    probabilities = np.array([float(p) for p in asrn.prior])
    probabilities /= probabilities.sum()
    scenarios = rng.choice(asrn.m, size=samples, p=probabilities)
    resolutions = rng.integers(len(symbols), size=(samples, len(elements)))

    draws: Counter[tuple[int, tuple[str, ...]]] = Counter()
    for i, row in zip(scenarios.tolist(), resolutions.tolist()):
        labels = tuple(
            symbols[k] if table.response(i, x) == STAR else table.response(i, x)
            for x, k in zip(elements, row)
        )
        draws[(i, labels)] += 1

    total = ZERO
    for (i, labels), times in draws.items():
        before = tuple(zip(selected, labels[:-1]))
        total += times * _truncated_gain(asrn.coverage[i], before, (e, labels[-1]))
    return total / samples


def build_permutation(
    problem: Problem,
    seed: int | None = None,
    *,
    samples: int | None = None,
    exact: bool = False,
    cap: int = DEFAULT_CAPS.enumeration_cap,
    workers: int = 1,
) -> RankingResult:
    """Greedy ranking by sampled (or exact) gain with the small-score fallback.

    Candidate ``e`` at step ``t`` samples from ``default_rng([seed, t, e])``.
    """
    asrn = as_asrn(problem)
    if not exact and seed is None:
        raise DomainError("sampled ranking needs a seed")
    if seed is not None and seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    m, n = asrn.m, asrn.n
    count = None if exact else (samples or default_sample_count(m, n, asrn.epsilon))
    threshold = phase2_threshold(m, n, asrn.epsilon)

    def score(step: int, order: list[int], e: int) -> Fraction:
        if exact:
            return exact_gain(asrn, order, e, cap)
        rng = np.random.default_rng([seed or 0, step, e])
        return sampled_gain(asrn, order, e, count or 1, rng)

    order: list[int] = []
    phase2_start: int | None = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for step in range(n):
            remaining = [e for e in range(n) if e not in order]
            scores = dict(zip(remaining, pool.map(lambda e: score(step, order, e), remaining)))
            best = max(remaining, key=lambda e: (scores[e], -e))
            if scores[best] < threshold:
                logger.debug(
                    "best gain %s below %s at step %d, appending the rest",
                    scores[best],
                    threshold,
                    step,
                )
                phase2_start = step
                order.extend(remaining)
                break
            logger.debug("step %d: element %d (gain %s)", step, best, scores[best])
            order.append(best)
    return RankingResult(tuple(order), phase2_start, count)


def _cover_time(asrn: AsrnInstance, i: int, order: Sequence[int]) -> Fraction:
    """Expected first prefix length at which scenario i is covered."""
    table = asrn.table
    cover = asrn.coverage[i]
    symbols = table.outcomes.symbols
    total = ZERO
    frontier: list[tuple[tuple[Observation, ...], Fraction]] = [((), Fraction(1))]
    for t, e in enumerate(order):
        grown: list[tuple[tuple[Observation, ...], Fraction]] = []
        for observed, weight in frontier:
            if cover.value(observed) >= 1:
                total += weight * t
                continue
            label = table.response(i, e)
            if label == STAR:
                grown.extend((observed + ((e, o),), weight / len(symbols)) for o in symbols)
            else:
                grown.append((observed + ((e, label),), weight))
        frontier = grown
    return total + sum((weight for _, weight in frontier), ZERO) * len(order)


def permutation_cost(
    problem: Problem, order: Sequence[int], cap: int = DEFAULT_CAPS.enumeration_cap
) -> Fraction:
    """Expected cover time of a fixed ranking, exact over star resolutions."""
    asrn = as_asrn(problem)
    if sorted(order) != list(range(asrn.n)):
        raise DomainError(f"not a permutation of 0..{asrn.n - 1}: {list(order)}")
    _check_cap(asrn, cap)
    return sum(
        (asrn.prior[i] * _cover_time(asrn, i, order) for i in range(asrn.m) if asrn.prior[i]),
        ZERO,
    )
