"""Tests for identifiers and generated file names."""

from odtn.naming import generated_filename, instance_id, slugify


def test_slugify_basic() -> None:
    assert slugify("Blood Panel") == "blood-panel"


def test_slugify_special_chars() -> None:
    assert slugify("Trial #3 (final)!") == "trial-3-final"


def test_slugify_underscores_and_dots() -> None:
    assert slugify("low_noise.v2") == "low-noise-v2"


def test_slugify_caps_length() -> None:
    assert len(slugify("a" * 100)) == 80


def test_slugify_empty_falls_back() -> None:
    assert slugify("!!!") == "instance"


def test_instance_id_uses_stem() -> None:
    assert instance_id("corpus/My Instance_v2.json") == "my-instance-v2"


def test_generated_filename() -> None:
    assert generated_filename("sparse", 32, 64, 7) == "sparse-m32-n64-s7.json"
    assert generated_filename("low_noise", 8, 12, 3) == "low-noise-m8-n12-s3.json"
