"""Seeded synthetic instances."""

from __future__ import annotations

import itertools
import logging
import math
from enum import Enum
from fractions import Fraction

import numpy as np

from odtn.diagnostics import check_identifiability, require_valid
from odtn.errors import GenerationError
from odtn.models import STAR, OdtnInstance, OutcomeAlphabet
from odtn.nonident import similarity_graph

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 50
PRIOR_RESOLUTION = 10**6
PLUS, MINUS = "+", "-"


class Kind(str, Enum):
    NOISELESS = "noiseless"
    LOW_NOISE = "low_noise"
    SPARSE = "sparse"
    NONIDENT = "nonident"


def uniform_prior(m: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, m) for _ in range(m))


def dirichlet_prior(
    m: int, rng: np.random.Generator, concentration: float = 1.0
) -> tuple[Fraction, ...]:
    """Dirichlet draw rounded to millionths; the rounding remainder goes to the largest entry."""
    weights = rng.dirichlet(np.full(m, concentration))
    units = [max(1, int(round(w * PRIOR_RESOLUTION))) for w in weights]
    units[int(np.argmax(units))] += PRIOR_RESOLUTION - sum(units)
    if min(units) < 1:
        raise GenerationError(f"cannot round a Dirichlet prior for m={m} to millionths")
    return tuple(Fraction(u, PRIOR_RESOLUTION) for u in units)


def _instance(columns: list[list[str]], prior: tuple[Fraction, ...]) -> OdtnInstance:
    """Columns are per hypothesis; rows are per test."""
    m = len(columns)
    n = len(columns[0]) if columns else 0
    rows = tuple(tuple(columns[i][e] for i in range(m)) for e in range(n))
    return OdtnInstance(
        outcomes=OutcomeAlphabet((PLUS, MINUS)),
        matrix=rows,
        prior=prior,
        test_names=tuple(f"T{e}" for e in range(n)),
    )


def _noiseless(m: int, n: int, rng: np.random.Generator) -> list[list[str]]:
    if n < math.ceil(math.log2(m)):
        raise GenerationError(f"{n} binary tests cannot tell {m} hypotheses apart")
    seen: set[tuple[str, ...]] = set()
    columns: list[list[str]] = []
    for _ in range(m * MAX_ATTEMPTS):
        column = tuple(PLUS if bit else MINUS for bit in rng.integers(2, size=n))
        if column not in seen:
            seen.add(column)
            columns.append(list(column))
            if len(columns) == m:
                return columns
    raise GenerationError(f"could not draw {m} distinct columns over {n} tests")


def _sprinkle_stars(
    columns: list[list[str]],
    c: int,
    r: int,
    rng: np.random.Generator,
    groups: list[int] | None = None,
) -> None:
    """Turn entries into stars while the column and row limits hold.

    A star is kept only if every hypothesis stays separated from every other
    (or, with ``groups``, from every hypothesis outside its own group).
    """
    m, n = len(columns), len(columns[0])
    column_stars = [0] * m
    row_stars = [0] * n
    for position in rng.permutation(m * n).tolist():
        i, e = divmod(position, n)
        if column_stars[i] >= c or row_stars[e] >= r:
            continue
        label = columns[i][e]
        columns[i][e] = STAR
        if _all_separated(columns, i, groups):
            column_stars[i] += 1
            row_stars[e] += 1
        else:
            columns[i][e] = label


def _all_separated(columns: list[list[str]], i: int, groups: list[int] | None = None) -> bool:
    mine = columns[i]
    for j, other in enumerate(columns):
        if j == i or (groups is not None and groups[i] == groups[j]):
            continue
        if not any(
            a != STAR and b != STAR and a != b for a, b in zip(mine, other)
        ):
            return False
    return True


def _sparse(m: int, n: int, alpha: float, rng: np.random.Generator) -> list[list[str]]:
    side = max(1, math.ceil(m**alpha - 1e-9))
    low = max(1, side // 2)
    columns = [[STAR] * n for _ in range(m)]
    for e in range(n):
        plus, minus = (int(x) for x in rng.integers(low, side + 1, size=2))
        chosen = rng.choice(m, size=min(m, plus + minus), replace=False).tolist()
        for i in chosen[:plus]:
            columns[i][e] = PLUS
        for i in chosen[plus:]:
            columns[i][e] = MINUS
    return _repair(columns, side, rng)


def _side_sizes(columns: list[list[str]], e: int) -> tuple[int, int]:
    labels = [column[e] for column in columns]
    return labels.count(PLUS), labels.count(MINUS)


def _repair(columns: list[list[str]], side: int, rng: np.random.Generator) -> list[list[str]]:
    """Separate every unseparated pair using a test with room on both sides."""
    n = len(columns[0])
    for i, j in itertools.combinations(range(len(columns)), 2):
        if any(
            a != STAR and b != STAR and a != b for a, b in zip(columns[i], columns[j])
        ):
            continue
        for e in rng.permutation(n).tolist():
            plus, minus = _side_sizes(columns, e)
            a, b = columns[i][e], columns[j][e]
            if a == STAR and b == STAR and plus < side and minus < side:
                columns[i][e], columns[j][e] = PLUS, MINUS
                break
            if a == PLUS and b == STAR and minus < side:
                columns[j][e] = MINUS
                break
            if a == MINUS and b == STAR and plus < side:
                columns[j][e] = PLUS
                break
            if b == PLUS and a == STAR and minus < side:
                columns[i][e] = MINUS
                break
            if b == MINUS and a == STAR and plus < side:
                columns[i][e] = PLUS
                break
        else:
            raise GenerationError(f"no room to separate hypotheses {i} and {j}")
    return columns


def _nonident(
    m: int, n: int, d: int, c: int, r: int, rng: np.random.Generator
) -> list[list[str]]:
    """Groups of at most d+1 hypotheses share a column; distinct groups stay separated."""
    groups: list[list[int]] = []
    order = rng.permutation(m).tolist()
    while order:
        size = int(rng.integers(1, d + 2))
        groups.append(sorted(order[:size]))
        order = order[size:]
    base = _noiseless(len(groups), n, rng) if len(groups) > 1 else [[PLUS] * n]
    columns: list[list[str]] = [[] for _ in range(m)]
    labels = [0] * m
    for g, (group, column) in enumerate(zip(groups, base)):
        for i in group:
            columns[i] = list(column)
            labels[i] = g
    _sprinkle_stars(columns, c, r, rng, labels)
    return columns


def generate_instance(
    kind: Kind | str,
    m: int,
    n: int,
    seed: int,
    *,
    c: int = 0,
    r: int = 0,
    alpha: float = 0.5,
    d: int = 1,
    prior: str = "uniform",
) -> OdtnInstance:
    """Draw an instance of the given kind and audit its guarantees; retries on failure."""
    kind = Kind(kind)
    if m < 2 or n < 1:
        raise GenerationError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    last_error = "no attempt made"
    for attempt in range(MAX_ATTEMPTS):
        try:
            if kind is Kind.NOISELESS:
                columns = _noiseless(m, n, rng)
            elif kind is Kind.LOW_NOISE:
                columns = _noiseless(m, n, rng)
                _sprinkle_stars(columns, c, r, rng)
            elif kind is Kind.SPARSE:
                columns = _sparse(m, n, alpha, rng)
            else:
                columns = _nonident(m, n, d, c, r, rng)
        except GenerationError as e:
            last_error = str(e)
            logger.debug("attempt %d failed: %s", attempt, e)
            continue
        weights = dirichlet_prior(m, rng) if prior == "dirichlet" else uniform_prior(m)
        inst = require_valid(_instance(columns, weights))
        problem = audit(inst, kind, c=c, r=r, alpha=alpha, d=d)
        if problem is None:
            return inst
        last_error = problem
        logger.debug("attempt %d rejected: %s", attempt, problem)
    raise GenerationError(f"{kind.value} m={m} n={n}: {last_error}")


def audit(
    inst: OdtnInstance,
    kind: Kind,
    *,
    c: int = 0,
    r: int = 0,
    alpha: float = 0.5,
    d: int = 1,
) -> str | None:
    """The reason an instance breaks its kind's guarantees, or None."""
    if kind is Kind.NONIDENT:
        degree = similarity_graph(inst).max_degree
        return None if degree <= d else f"similarity degree {degree} exceeds {d}"
    result = check_identifiability(inst)
    if not result.identifiable:
        return f"hypotheses {result.witness} are not separated"
    if kind is Kind.NOISELESS and any(inst.star_counts):
        return "noiseless instance has stars"
    if kind is Kind.LOW_NOISE:
        if max(inst.star_counts) > c or max(inst.row_star_counts) > r:
            return "star limits exceeded"
    if kind is Kind.SPARSE:
        side = max(1, math.ceil(inst.m**alpha - 1e-9))
        widest = max(max(len(inst.side(e, PLUS)), len(inst.side(e, MINUS))) for e in range(inst.n))
        if widest > side:
            return f"test side {widest} exceeds {side}"
    return None
