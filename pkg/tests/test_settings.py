"""Tests for enumeration caps."""

import pytest

from odtn.errors import UsageError
from odtn.settings import DEFAULT_CAPS, load_caps


def test_defaults_without_environment() -> None:
    assert load_caps(env={}) == DEFAULT_CAPS
    assert DEFAULT_CAPS.enumeration_cap == 16


def test_environment_overrides_default() -> None:
    caps = load_caps(env={"ODTN_ENUMERATION_CAP": "4", "ODTN_DP_MAX_TESTS": "6"})
    assert caps.enumeration_cap == 4
    assert caps.dp_max_tests == 6
    assert caps.ssc_max_m == DEFAULT_CAPS.ssc_max_m


def test_explicit_override_beats_environment() -> None:
    caps = load_caps(env={"ODTN_ENUMERATION_CAP": "4"}, enumeration_cap=9)
    assert caps.enumeration_cap == 9


def test_none_override_is_ignored() -> None:
    assert load_caps(env={}, enumeration_cap=None) == DEFAULT_CAPS


def test_non_integer_environment_value() -> None:
    with pytest.raises(UsageError, match="ODTN_SSC_MAX_M"):
        load_caps(env={"ODTN_SSC_MAX_M": "lots"})


def test_non_positive_cap() -> None:
    with pytest.raises(UsageError, match="positive"):
        load_caps(env={}, enumeration_cap=0)
