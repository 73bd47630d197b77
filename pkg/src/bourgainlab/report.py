"""Run reports: JSON for everything, CSV for the empirical-constant ledger."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

LEDGER_FIELDS = ("suite", "metric", "instance", "value")


def clean(obj):
    """JSON-safe copy: Fractions as strings, numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


@dataclass
class Report:
    config: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    ledger: list = field(default_factory=list)
    wall_time: float = 0.0

    def record(self, suite: str, name: str, status: str, **details) -> None:
        if status not in ("pass", "fail", "logged"):
            raise ValueError(f"bad status {status!r}")
        self.results.append({"suite": suite, "name": name, "status": status, "details": clean(details)})

    def log(self, suite: str, metric: str, instance: str, value) -> None:
        self.ledger.append({"suite": suite, "metric": metric, "instance": instance, "value": clean(value)})

    @property
    def failures(self) -> list:
        return [r for r in self.results if r["status"] == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "config": clean(self.config),
            "summary": {
                "checks": len(self.results),
                "failed": len(self.failures),
                "passed": self.passed,
            },
            "results": self.results,
            "ledger": self.ledger,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(data.get("config", {}), list(data.get("results", [])), list(data.get("ledger", [])),
                   float(data.get("wall_time", 0.0)))


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def ledger_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=LEDGER_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in report.ledger:
        writer.writerow({k: row[k] for k in LEDGER_FIELDS})
    return buf.getvalue()


def emit_report(report: Report, path: str, fmt: str = "json") -> None:
    if fmt == "json":
        text = report_json(report)
    elif fmt == "csv":
        text = ledger_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", path) from exc


def load_report(path: str) -> Report:
    with open(path) as fh:
        return Report.from_dict(json.load(fh))
