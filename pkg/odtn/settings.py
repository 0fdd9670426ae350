"""Enumeration caps and their environment overrides."""

from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass, fields, replace

from odtn.errors import UsageError

ENV_PREFIX = "ODTN_"


@dataclass(frozen=True)
class Caps:
    """Limits that keep exact enumerations at desk scale."""

    enumeration_cap: int = 16
    dp_max_tests: int = 10
    dp_max_states: int = 10**7
    ssc_max_m: int = 13
    brute_force_max_n: int = 8


DEFAULT_CAPS = Caps()


def load_caps(env: Mapping[str, str] | None = None, **overrides: int | None) -> Caps:
    """Defaults, then ``ODTN_<FIELD>`` environment values, then explicit overrides."""
    env = os.environ if env is None else env
    values: dict[str, int] = {}
    for f in fields(Caps):
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is None:
            continue
        try:
            values[f.name] = int(raw)
        except ValueError:
            raise UsageError(f"{ENV_PREFIX}{f.name.upper()} must be an integer, got {raw!r}")
    for name, value in overrides.items():
        if value is not None:
            values[name] = value
    for name, value in values.items():
        if value < 1:
            raise UsageError(f"cap {name} must be positive, got {value}")
    return replace(DEFAULT_CAPS, **values)
