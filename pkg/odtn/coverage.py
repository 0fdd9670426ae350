"""Coverage functions and the registry that turns an outcome table into an ASRN instance."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from odtn.errors import DegenerateInstanceError, UsageError
from odtn.models import AsrnInstance, CoverageFunction, Observation, OdtnInstance, Problem

ONE = Fraction(1)


@dataclass(frozen=True)
class EliminationCoverage:
    """Fraction of the other hypotheses ruled out by the observed pairs, capped at 1.

    With ``denominator = m - 1`` this is the ODTN coverage function; with
    ``m - d - 1`` it is the rescaled variant used on non-identifiable
    instances. A non-positive denominator means the scenario starts covered.
    """

    table: OdtnInstance
    hypothesis: int
    denominator: int

    def value(self, observed: Iterable[Observation]) -> Fraction:
        if self.denominator <= 0:
            return ONE
        ruled_out: set[int] = set()
        for e, o in observed:
            ruled_out |= self.table.eliminated_by(e, o)
        ruled_out.discard(self.hypothesis)
        return min(Fraction(len(ruled_out), self.denominator), ONE)


@dataclass(frozen=True)
class WeightedCoverage:
    """Truncated additive coverage: ``min(1, sum of w(e, o) over distinct observed pairs)``."""

    weights: tuple[tuple[Observation, Fraction], ...]

    def value(self, observed: Iterable[Observation]) -> Fraction:
        lookup = dict(self.weights)
        total = sum((lookup.get(pair, Fraction(0)) for pair in set(observed)), Fraction(0))
        return min(total, ONE)


CoverageFactory = Callable[..., CoverageFunction]

_REGISTRY: dict[str, CoverageFactory] = {}


def register_coverage(name: str, factory: CoverageFactory) -> None:
    """Register ``factory(table, hypothesis, **params)`` under ``name``."""
    _REGISTRY[name] = factory


def registered_families() -> list[str]:
    return sorted(_REGISTRY)


def build_coverage(
    name: str, table: OdtnInstance, hypothesis: int, **params: Any
) -> CoverageFunction:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UsageError(f"unknown coverage family {name!r}")
    return factory(table, hypothesis, **params)


def _elimination(table: OdtnInstance, hypothesis: int, **_: Any) -> CoverageFunction:
    return EliminationCoverage(table, hypothesis, table.m - 1)


def _ftilde(table: OdtnInstance, hypothesis: int, *, d: int, **_: Any) -> CoverageFunction:
    return EliminationCoverage(table, hypothesis, table.m - d - 1)


def _weighted(
    table: OdtnInstance,
    hypothesis: int,
    *,
    weights: Sequence[Mapping[Observation, Fraction]],
    **_: Any,
) -> CoverageFunction:
    return WeightedCoverage(tuple(sorted(weights[hypothesis].items())))


register_coverage("elimination", _elimination)
register_coverage("ftilde", _ftilde)
register_coverage("weighted", _weighted)


def odtn_coverage_value(inst: OdtnInstance, i: int, observed: Iterable[Observation]) -> Fraction:
    """f_i(S): eliminated other hypotheses over m - 1."""
    if inst.m < 2:
        raise DegenerateInstanceError(f"coverage needs at least 2 hypotheses, got {inst.m}")
    return EliminationCoverage(inst, i, inst.m - 1).value(observed)


def _declared_epsilon(family: str, inst: OdtnInstance, params: Mapping[str, Any]) -> Fraction:
    if "epsilon" in params:
        return Fraction(params["epsilon"])
    if family == "elimination":
        return Fraction(1, inst.m - 1)
    if family == "ftilde":
        denominator = inst.m - params["d"] - 1
        return Fraction(1, denominator) if denominator > 0 else ONE
    if family == "weighted":
        positive = [w for table in params["weights"] for w in table.values() if w > 0]
        return min(positive, default=ONE)
    raise UsageError(f"coverage family {family!r} needs an explicit epsilon")


def to_asrn(inst: OdtnInstance, family: str = "elimination", **params: Any) -> AsrnInstance:
    """Attach one coverage function per hypothesis from a registered family."""
    if family == "elimination" and inst.m < 2:
        raise DegenerateInstanceError(f"elimination coverage needs m >= 2, got {inst.m}")
    factory_params = {k: v for k, v in params.items() if k != "epsilon"}
    coverage = tuple(build_coverage(family, inst, i, **factory_params) for i in range(inst.m))
    return AsrnInstance(
        table=inst,
        coverage=coverage,
        epsilon=_declared_epsilon(family, inst, params),
        coverage_family=family,
    )


def as_asrn(problem: Problem) -> AsrnInstance:
    """ODTN instances get elimination coverage; ASRN instances pass through."""
    if isinstance(problem, AsrnInstance):
        return problem
    return to_asrn(problem)


ELIMINATION_FAMILIES = frozenset({"elimination", "ftilde"})


def is_elimination_family(asrn: AsrnInstance) -> bool:
    """True when every coverage value is a function of the alive set alone."""
    return asrn.coverage_family in ELIMINATION_FAMILIES
