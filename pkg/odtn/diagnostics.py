"""Static checks on instances: validation, identifiability, uncertainty, feasibility."""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction

import numpy as np

from odtn.coverage import as_asrn
from odtn.errors import DegenerateInstanceError, InvalidInstanceError
from odtn.expanded import expand
from odtn.models import (
    STAR,
    AsrnInstance,
    IdentifiabilityResult,
    Observation,
    OdtnInstance,
    Problem,
    UncertaintyStats,
    ValidationReport,
)
from odtn.settings import DEFAULT_CAPS

logger = logging.getLogger(__name__)


def validate_instance(inst: OdtnInstance) -> ValidationReport:
    """Collect every structural problem; never raises."""
    report = ValidationReport()
    symbols = inst.outcomes.symbols
    if not symbols:
        report.issues.append("outcome alphabet is empty")
    if len(set(symbols)) != len(symbols):
        report.issues.append(f"outcome labels are not distinct: {list(symbols)}")
    if STAR in symbols:
        report.issues.append("outcome alphabet must not contain '*'")
    if inst.m < 1:
        report.issues.append("instance has no hypotheses")
    if inst.test_names and len(inst.test_names) != inst.n:
        report.issues.append(f"{len(inst.test_names)} test names for {inst.n} tests")

    legal = set(symbols) | {STAR}
    for e, row in enumerate(inst.matrix):
        label = inst.test_names[e] if e < len(inst.test_names) else f"T{e}"
        if len(row) != inst.m:
            report.issues.append(f"test {label} row has length {len(row)}, expected {inst.m}")
        for j, entry in enumerate(row):
            if entry not in legal:
                report.issues.append(f"unknown symbol {entry!r} in test {label} at hypothesis {j}")

    for i, p in enumerate(inst.prior):
        if p < 0:
            report.issues.append(f"prior of hypothesis {i} is negative ({p})")
    total = sum(inst.prior, Fraction(0))
    if abs(total - 1) > inst.tolerance:
        report.issues.append(f"prior sums to {float(total):g}")
    return report


def require_valid(inst: OdtnInstance) -> OdtnInstance:
    report = validate_instance(inst)
    if not report.valid:
        raise InvalidInstanceError(report.issues)
    return inst


def separates(inst: OdtnInstance, i: int, j: int) -> bool:
    """True when some test answers i and j with distinct deterministic outcomes."""
    return j in inst.separated_from[i]


def check_identifiability(inst: OdtnInstance) -> IdentifiabilityResult:
    for i, j in itertools.combinations(range(inst.m), 2):
        if not separates(inst, i, j):
            return IdentifiabilityResult(False, (i, j))
    return IdentifiabilityResult(True)


def max_side(inst: OdtnInstance) -> int:
    """Largest deterministic outcome side over all tests."""
    return max(
        (len(inst.side(e, o)) for e in range(inst.n) for o in inst.outcomes),
        default=0,
    )


def uncertainty_stats(inst: OdtnInstance) -> UncertaintyStats:
    if inst.m < 2:
        raise DegenerateInstanceError(f"uncertainty needs at least 2 hypotheses, got {inst.m}")
    largest = max_side(inst)
    alpha = math.log2(largest) / math.log2(inst.m) if largest > 1 else 0.0
    return UncertaintyStats(
        c=max(inst.star_counts, default=0),
        r=max(inst.row_star_counts, default=0),
        alpha=alpha,
        max_side=largest,
    )


def separability(problem: Problem) -> Fraction:
    if isinstance(problem, AsrnInstance):
        return problem.epsilon
    if problem.m < 2:
        raise DegenerateInstanceError(f"separability needs at least 2 hypotheses, got {problem.m}")
    return Fraction(1, problem.m - 1)


def check_feasibility(
    asrn: AsrnInstance, cap: int = DEFAULT_CAPS.enumeration_cap
) -> tuple[int, tuple[str, ...]] | None:
    """First (scenario, outcome vector) whose full observation stays below 1, or None."""
    elements = tuple(range(asrn.n))
    for i in range(asrn.m):
        for scenario in expand(asrn, i, cap):
            if asrn.coverage[i].value(scenario.pairs(elements)) < 1:
                return i, scenario.outcomes
    return None


def observed_separability(
    problem: Problem, rng: np.random.Generator, chains: int = 100
) -> Fraction | None:
    """Smallest positive increment seen along random observation chains.

    Each chain walks a random ordering of the elements for a random scenario,
    resolving stars uniformly. Useful for spot-checking a declared epsilon.
    """
    asrn = as_asrn(problem)
    table = asrn.table
    smallest: Fraction | None = None
    for _ in range(chains):
        i = int(rng.integers(asrn.m))
        observed: tuple[Observation, ...] = ()
        before = asrn.coverage[i].value(observed)
        for e in rng.permutation(asrn.n):
            label = table.response(i, int(e))
            if label == STAR:
                label = table.outcomes.symbols[int(rng.integers(table.outcomes.size))]
            observed += ((int(e), label),)
            after = asrn.coverage[i].value(observed)
            if after > before and (smallest is None or after - before < smallest):
                smallest = after - before
            before = after
    return smallest
