"""Suite reports: typed metrics, canonical JSON, flat CSV.

A metric records the measured value together with the bound it must
satisfy, so pass/fail is a pure function of the recorded numbers. The
emitted text is canonical: metric order is the suite's insertion order,
constants are sorted by name, and the wall clock is masked to null so
equal configs produce byte-identical files. The measured wall clock
lives on the in-memory Report only (and is excluded from equality).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["Metric", "Report", "emit_report", "parse_report", "all_pass"]

_OPS = ("<=", ">=", "==")


@dataclass(frozen=True)
class Metric:
    """One measured quantity and the bound it is held to."""

    name: str
    value: float
    op: str
    tolerance: float
    half_width: float | None = None

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"op must be one of {_OPS}")

    @property
    def passed(self) -> bool:
        if self.op == "<=":
            return self.value <= self.tolerance
        if self.op == ">=":
            return self.value >= self.tolerance
        return self.value == self.tolerance


@dataclass(frozen=True)
class Report:
    suite: str
    seed: str
    metrics: tuple
    constants: dict
    extras: dict = field(default_factory=dict)
    wall_clock_s: float | None = field(default=None, compare=False)

    def metric(self, name: str) -> Metric:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)


def all_pass(report: Report) -> bool:
    return all(m.passed for m in report.metrics)


def _metric_obj(m: Metric) -> dict:
    return {
        "value": m.value,
        "op": m.op,
        "tolerance": m.tolerance,
        "half_width": m.half_width,
        "pass": m.passed,
    }


def emit_report(report: Report, format: str = "json") -> str:
    if format == "json":
        obj = {
            "suite": report.suite,
            "seed": report.seed,
            "metrics": {m.name: _metric_obj(m) for m in report.metrics},
            "constants": {k: report.constants[k] for k in sorted(report.constants)},
            "extras": report.extras,
            "wall_clock_s": None,
        }
        return json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if format == "csv":
        lines = ["suite,seed,metric,value,op,tolerance,half_width,pass"]
        for m in report.metrics:
            hw = "" if m.half_width is None else repr(m.half_width)
            lines.append(
                f"{report.suite},{report.seed},{m.name},{m.value!r},{m.op},"
                f"{m.tolerance!r},{hw},{str(m.passed).lower()}"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format: {format!r} (expected json or csv)")


def parse_report(text: str) -> Report:
    """Inverse of the JSON emitter; parse(emit(r)) == r."""
    obj = json.loads(text)
    metrics = tuple(
        Metric(
            name=name,
            value=entry["value"],
            op=entry["op"],
            tolerance=entry["tolerance"],
            half_width=entry["half_width"],
        )
        for name, entry in obj["metrics"].items()
    )
    return Report(
        suite=obj["suite"],
        seed=obj["seed"],
        metrics=metrics,
        constants=obj["constants"],
        extras=obj.get("extras", {}),
        wall_clock_s=obj.get("wall_clock_s"),
    )
