"""Identifiers for instances and generated files."""

from __future__ import annotations

import re
from pathlib import Path


def slugify(text: str) -> str:
    """Convert text to a lowercase-hyphenated slug."""
    text = text.lower()
    text = re.sub(r"[^a-z0-9\s_.-]", "", text)
    text = re.sub(r"[\s_.]+", "-", text.strip())
    text = re.sub(r"-+", "-", text).strip("-")
    return text[:80] or "instance"


def instance_id(path: Path | str) -> str:
    """Report id for an instance file: the slugified file stem."""
    return slugify(Path(path).stem)


def generated_filename(kind: str, m: int, n: int, seed: int) -> str:
    """Default file name for a generated instance: 'sparse-m32-n64-s7.json'."""
    return f"{slugify(kind)}-m{m}-n{n}-s{seed}.json"
