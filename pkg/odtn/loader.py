"""JSON codec for instance documents."""

from __future__ import annotations

import json
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

from odtn.diagnostics import require_valid
from odtn.errors import InstanceParseError
from odtn.models import OdtnInstance, OutcomeAlphabet, PriorLike, to_fraction

SCHEMA = "odtn.instance/1"


def parse_instance(data: dict) -> OdtnInstance:  # type: ignore[type-arg]
    """Parse an instance document; structure errors raise, content errors are validated."""
    if not isinstance(data, dict):
        raise InstanceParseError("instance document must be a JSON object")
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise InstanceParseError(f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    try:
        outcomes = tuple(str(o) for o in data.get("outcomes", ["+", "-"]))
        tests = [_parse_test(item) for item in data["tests"]]
        raw_prior = data.get("prior")
    except (KeyError, TypeError) as e:
        raise InstanceParseError(f"malformed instance document: {e}") from e

    m = len(tests[0][1]) if tests else 0
    prior = _parse_prior(raw_prior, m)

    inst = OdtnInstance(
        outcomes=OutcomeAlphabet(outcomes),
        matrix=tuple(row for _, row in tests),
        prior=prior,
        test_names=tuple(name for name, _ in tests),
    )
    return require_valid(inst)


def _parse_prior(raw: Sequence[PriorLike] | None, m: int) -> tuple[Fraction, ...]:
    """Missing priors are uniform over the m hypotheses."""
    if raw is None:
        return tuple(Fraction(1, m) for _ in range(m))
    try:
        return tuple(to_fraction(p) for p in raw)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise InstanceParseError(f"unparseable prior entry: {e}") from e


def _parse_test(item: dict) -> tuple[str, tuple[str, ...]]:  # type: ignore[type-arg]
    row = item["row"]
    if isinstance(row, str):
        raise InstanceParseError(f"row of test {item.get('name')!r} must be an array of labels")
    return str(item["name"]), tuple(str(label) for label in row)


def load_instance(path: Path) -> OdtnInstance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InstanceParseError(f"instance file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"{path}: invalid JSON ({e})") from e
    return parse_instance(data)


def dump_instance(inst: OdtnInstance) -> dict[str, Any]:
    return {
        "schema": SCHEMA,
        "outcomes": list(inst.outcomes.symbols),
        "prior": [str(p) for p in inst.prior],
        "tests": [{"name": inst.name(e), "row": list(row)} for e, row in enumerate(inst.matrix)],
    }


def instance_to_json(inst: OdtnInstance) -> str:
    return json.dumps(dump_instance(inst), indent=2) + "\n"


def save_instance(inst: OdtnInstance, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(instance_to_json(inst), encoding="utf-8")
    return path
