"""CSV and JSON writers for run, bounds and regression reports."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable
from fractions import Fraction
from pathlib import Path
from typing import Any

from odtn.models import BoundsReport, EvalReport

EVAL_SCHEMA = "odtn.eval/1"
BOUNDS_SCHEMA = "odtn.bounds/1"
REGRESS_SCHEMA = "odtn.regress/1"

CSV_FIELDS = [
    "schema",
    "instance_id",
    "policy",
    "trials",
    "mean_cost",
    "ci_halfwidth",
    "exact_cost",
    "error_rate",
    "error_lo",
    "error_hi",
    "entropy_lb",
    "ssc_lb",
    "sparsity_lb",
    "opt",
]


def fmt(value: object) -> str:
    """Render a number for CSV; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def eval_rows_to_csv(reports: Iterable[EvalReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in sorted(reports, key=lambda r: (r.instance_id, r.policy)):
        writer.writerow(
            {
                "schema": EVAL_SCHEMA,
                "instance_id": report.instance_id,
                "policy": report.policy,
                "trials": report.trials,
                "mean_cost": fmt(report.mean_cost),
                "ci_halfwidth": fmt(report.ci_halfwidth),
                "exact_cost": fmt(report.exact_cost),
                "error_rate": fmt(report.error_rate),
                "error_lo": fmt(report.error_lo),
                "error_hi": fmt(report.error_hi),
                "entropy_lb": fmt(report.entropy_lb),
                "ssc_lb": fmt(report.ssc_lb),
                "sparsity_lb": fmt(report.sparsity_lb),
                "opt": fmt(report.opt),
            }
        )
    return buffer.getvalue()


def _exact(value: Fraction | None) -> dict[str, Any] | None:
    if value is None:
        return None
    return {"exact": str(value), "value": float(value)}


def bounds_to_dict(report: BoundsReport, instance_id: str | None = None) -> dict[str, Any]:
    return {
        "schema": BOUNDS_SCHEMA,
        "instance_id": instance_id,
        "opt_adaptive": _exact(report.opt_adaptive),
        "ssc_lb": _exact(report.ssc_lb),
        "entropy_lb": report.entropy_lb,
        "sparsity_lb": report.sparsity_lb,
        "opt_nonadaptive": _exact(report.opt_nonadaptive),
        "opt_nonadaptive_order": (
            list(report.opt_nonadaptive_order) if report.opt_nonadaptive_order else None
        ),
        "dp_states": report.dp_states,
    }


def to_json(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_output(text: str, path: Path | None) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    if path is None:
        print(text, end="")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
