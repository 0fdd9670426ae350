"""Exception hierarchy for odtn.

Every exception carries the exit code the command-line interface maps it to.
"""

from __future__ import annotations


class OdtnError(Exception):
    """Base class for all odtn errors."""

    exit_code = 5


class UsageError(OdtnError):
    """Bad flag combination, missing seed, unknown algorithm id."""

    exit_code = 2


class GenerationError(UsageError):
    """Generator parameters could not be satisfied after bounded retries."""


class InstanceParseError(OdtnError):
    """An instance document is malformed."""

    exit_code = 3


class InvalidInstanceError(OdtnError):
    """An instance failed validation where a valid one is required."""

    exit_code = 3

    def __init__(self, issues: list[str] | str) -> None:
        self.issues = [issues] if isinstance(issues, str) else list(issues)
        super().__init__("; ".join(self.issues))


class DegenerateInstanceError(InvalidInstanceError):
    """Too few hypotheses for the requested operation."""


class IdentifiabilityError(InvalidInstanceError):
    """Some pair of hypotheses has no deterministic separating test."""


class EnumerationInfeasibleError(OdtnError):
    """An enumeration or dynamic program would exceed its configured cap."""

    exit_code = 4


class DomainError(OdtnError, ValueError):
    """An argument lies outside its domain (unknown outcome, bad permutation)."""


class AlreadySelectedError(DomainError):
    """An element was observed twice in one run."""


class InconsistentObservationsError(OdtnError):
    """Every scenario is contradicted by the observed outcomes."""


class TerminalStateError(OdtnError):
    """A score was requested at a state where the policy must have stopped."""


class StoppingUnreachableError(OdtnError):
    """No remaining element can make progress toward the stopping rule."""


class RegressionFailure(OdtnError):
    """A regression corpus replay disagreed with its recorded expectations."""


class SessionAborted(OdtnError):
    """The user quit an interactive session."""

    exit_code = 1
