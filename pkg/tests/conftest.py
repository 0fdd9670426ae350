"""Shared test fixtures."""

from __future__ import annotations

import pytest

from odtn.models import OdtnInstance


@pytest.fixture
def separating_pair() -> OdtnInstance:
    """m=2 with one separating test."""
    return OdtnInstance.from_rows(["+-"])


@pytest.fixture
def useless_first() -> OdtnInstance:
    """m=2 where test 0 tells nothing and test 1 separates."""
    return OdtnInstance.from_rows(["++", "+-"])


@pytest.fixture
def balanced_four() -> OdtnInstance:
    """m=4 uniform, two balanced noiseless tests forming a complete binary split."""
    return OdtnInstance.from_rows(["++--", "+-+-"])


@pytest.fixture
def star_three() -> OdtnInstance:
    """m=3 uniform; test 0 answers + for 0, - for 1 and * for 2."""
    return OdtnInstance.from_rows(["+-*"])


@pytest.fixture
def noisy_three() -> OdtnInstance:
    """m=3 identifiable instance with one star entry."""
    return OdtnInstance.from_rows(["+-*", "++-", "-+-"])


@pytest.fixture
def star_then_separator() -> OdtnInstance:
    """Hypothesis 0 is * on test 0; test 1 separates deterministically."""
    return OdtnInstance.from_rows(["*-", "+-"])


@pytest.fixture
def twins() -> OdtnInstance:
    """Hypotheses 0 and 1 share a column; 2 and 3 are separated by test 1."""
    return OdtnInstance.from_rows(["++--", "++-+"])


@pytest.fixture
def uniform_eight() -> OdtnInstance:
    return OdtnInstance.from_rows(["++++----", "++--++--", "+-+-+-+-"])
