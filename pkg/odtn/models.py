"""Data models for odtn."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Protocol, Union, runtime_checkable

STAR = "*"
DEFAULT_TOLERANCE = Fraction(1, 10**9)

Observation = tuple[int, str]
PriorLike = Union[Fraction, int, float, str]


def to_fraction(value: PriorLike) -> Fraction:
    """Parse a prior entry exactly; floats go through their shortest repr."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class OutcomeAlphabet:
    """Ordered outcome labels. ``*`` is reserved for noisy matrix entries."""

    symbols: tuple[str, ...] = ("+", "-")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, label: str) -> int:
        return self.symbols.index(label)

    def __contains__(self, label: object) -> bool:
        return label in self.symbols

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class OdtnInstance:
    """An outcome table: ``matrix[e][i]`` is test e's outcome under hypothesis i.

    Construction does not validate; call ``diagnostics.validate_instance``
    (or load through ``loader``) before handing an instance to an algorithm.
    """

    outcomes: OutcomeAlphabet
    matrix: tuple[tuple[str, ...], ...]
    prior: tuple[Fraction, ...]
    test_names: tuple[str, ...] = ()
    tolerance: Fraction = DEFAULT_TOLERANCE

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[str] | str],
        prior: Sequence[PriorLike] | None = None,
        outcomes: Sequence[str] = ("+", "-"),
        names: Sequence[str] | None = None,
    ) -> OdtnInstance:
        """Build an instance from rows; a packed string row splits into characters."""
        matrix = tuple(tuple(row) for row in rows)
        if prior is None:
            m = len(matrix[0]) if matrix else 0
            parsed = tuple(Fraction(1, m) for _ in range(m))
        else:
            parsed = tuple(to_fraction(p) for p in prior)
        return cls(
            outcomes=OutcomeAlphabet(tuple(outcomes)),
            matrix=matrix,
            prior=parsed,
            test_names=tuple(names) if names else (),
        )

    @property
    def m(self) -> int:
        return len(self.prior)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def name(self, e: int) -> str:
        return self.test_names[e] if self.test_names else f"T{e}"

    def response(self, i: int, e: int) -> str:
        return self.matrix[e][i]

    @cached_property
    def star_counts(self) -> tuple[int, ...]:
        """c_i: number of tests answering ``*`` under hypothesis i."""
        return tuple(sum(row[i] == STAR for row in self.matrix) for i in range(self.m))

    @cached_property
    def row_star_counts(self) -> tuple[int, ...]:
        return tuple(sum(label == STAR for label in row) for row in self.matrix)

    @cached_property
    def sides(self) -> tuple[dict[str, frozenset[int]], ...]:
        """Per test, the hypotheses answering each outcome (the star side included)."""
        result = []
        for row in self.matrix:
            groups: dict[str, set[int]] = {o: set() for o in self.outcomes}
            groups[STAR] = set()
            for i, label in enumerate(row):
                groups.setdefault(label, set()).add(i)
            result.append({o: frozenset(members) for o, members in groups.items()})
        return tuple(result)

    def side(self, e: int, o: str) -> frozenset[int]:
        return self.sides[e].get(o, frozenset())

    def star_side(self, e: int) -> frozenset[int]:
        return self.sides[e][STAR]

    @cached_property
    def _eliminations(self) -> tuple[dict[str, frozenset[int]], ...]:
        result = []
        for row in self.matrix:
            result.append(
                {
                    o: frozenset(j for j, label in enumerate(row) if label not in (o, STAR))
                    for o in self.outcomes
                }
            )
        return tuple(result)

    def eliminated_by(self, e: int, o: str) -> frozenset[int]:
        """Hypotheses contradicted by observing outcome o on test e."""
        return self._eliminations[e][o]

    def consistent(self, i: int, observed: Iterable[Observation]) -> bool:
        return all(self.matrix[e][i] in (o, STAR) for e, o in observed)

    @cached_property
    def separated_from(self) -> tuple[frozenset[int], ...]:
        """Per hypothesis, every other hypothesis some test separates from it deterministically."""
        result = []
        for i in range(self.m):
            separated: set[int] = set()
            for e, row in enumerate(self.matrix):
                if row[i] != STAR and row[i] in self.outcomes:
                    separated |= self.eliminated_by(e, row[i])
            result.append(frozenset(separated))
        return tuple(result)


@runtime_checkable
class CoverageFunction(Protocol):
    """Monotone submodular map from observed (element, outcome) pairs to [0, 1]."""

    def value(self, observed: Iterable[Observation]) -> Fraction: ...


@dataclass(frozen=True)
class AsrnInstance:
    """A response table plus one coverage function per scenario."""

    table: OdtnInstance
    coverage: tuple[CoverageFunction, ...]
    epsilon: Fraction
    coverage_family: str = "custom"

    @property
    def m(self) -> int:
        return self.table.m

    @property
    def n(self) -> int:
        return self.table.n

    @property
    def prior(self) -> tuple[Fraction, ...]:
        return self.table.prior

    @property
    def outcomes(self) -> OutcomeAlphabet:
        return self.table.outcomes


Problem = Union[OdtnInstance, AsrnInstance]


@dataclass
class ValidationReport:
    """Every issue found in an instance; empty means valid."""

    issues: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues


@dataclass(frozen=True)
class IdentifiabilityResult:
    identifiable: bool
    witness: tuple[int, int] | None = None


@dataclass(frozen=True)
class UncertaintyStats:
    """Column uncertainty c, row uncertainty r and the sparsity exponent."""

    c: int
    r: int
    alpha: float
    max_side: int


@dataclass(frozen=True)
class BranchStats:
    """Mass and expanded-scenario count routed to each outcome of one element."""

    mass: dict[str, Fraction]
    count: dict[str, int]


@dataclass(frozen=True)
class ScoreBreakdown:
    first_term: Fraction
    second_term: Fraction

    @property
    def total(self) -> Fraction:
        return self.first_term + self.second_term


@dataclass(frozen=True)
class Transcript:
    """The record of one run and its conclusion.

    ``verdict`` is the final compatible set; ``identified`` names the single
    hypothesis when the run narrowed it down to one.
    """

    steps: tuple[Observation, ...]
    verdict: tuple[int, ...]
    policy: str
    identified: int | None = None
    seed: int | None = None
    stop: str = "covered"
    detail: dict[str, int] = field(default_factory=dict)

    @property
    def test_count(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class RankingResult:
    """A non-adaptive permutation; ``phase2_start`` is None when phase 2 never began."""

    permutation: tuple[int, ...]
    phase2_start: int | None
    sample_count: int | None


@dataclass(frozen=True)
class MemberVerdict:
    identified: int | None
    steps: tuple[Observation, ...] = ()
    phases: tuple[int, int, int] = (0, 0, 0)

    @property
    def tests_used(self) -> int:
        return len(self.steps)


@dataclass
class BoundsReport:
    """Reference values for one instance; None marks a bound that hit its cap."""

    entropy_lb: float
    sparsity_lb: int | None
    opt_adaptive: Fraction | None = None
    ssc_lb: Fraction | None = None
    opt_nonadaptive: Fraction | None = None
    opt_nonadaptive_order: tuple[int, ...] | None = None
    dp_states: int | None = None


@dataclass
class EvalReport:
    """One (instance, policy) row of a run report."""

    instance_id: str
    policy: str
    trials: int
    mean_cost: float | None = None
    ci_halfwidth: float | None = None
    exact_cost: Fraction | None = None
    error_rate: float | None = None
    error_lo: float | None = None
    error_hi: float | None = None
    entropy_lb: float | None = None
    ssc_lb: Fraction | None = None
    sparsity_lb: int | None = None
    opt: Fraction | None = None
    per_hypothesis: tuple[Fraction, ...] = ()
