"""Verification report records and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

__all__ = ["ExtremumReport", "VerificationReport", "to_json_line", "summarize"]


def _clean(value: Any) -> Any:
    # JSON has no NaN/inf; keep the information as strings
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


@dataclass(frozen=True)
class ExtremumReport:
    """Outcome of one extremum-point inequality check.

    ``margin`` is signed so that ``pass`` holds exactly when
    ``margin >= -tolerance``.  A report with ``applicable=False`` records a
    case outside the inequality's hypotheses (extremum at an end node) and
    counts neither as a pass nor as a failure.
    """

    kind: str
    x_star: float
    f_at_a: float
    f_at_xstar: float
    lhs: float
    rhs: float
    margin: float
    case_tag: str
    tolerance: float
    applicable: bool = True
    check: str = ""
    note: str = ""

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.margin >= -self.tolerance

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["pass"] = self.passed
        return _clean(d)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a principle check on a solution.

    ``status`` is ``"checked"`` when the theorem's hypotheses hold and the
    check counts toward the exit code, or ``"informational"`` when they do not.
    """

    principle: str
    value: float
    bound: float
    margin: float
    tolerance: float
    location: tuple[float, ...] = ()
    status: str = "checked"
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    @property
    def counts(self) -> bool:
        return self.status == "checked"

    @property
    def failed(self) -> bool:
        return self.counts and not self.passed

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["location"] = list(self.location)
        d["pass"] = self.passed
        return _clean(d)


def to_json_line(report: ExtremumReport | VerificationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, allow_nan=False)


def summarize(reports: list) -> dict[str, int]:
    """Counts of passed / failed / informational reports."""
    out = {"total": len(reports), "passed": 0, "failed": 0, "informational": 0}
    for r in reports:
        if isinstance(r, ExtremumReport):
            counted = r.applicable
            failed = counted and not r.passed
        else:
            counted = r.counts
            failed = r.failed
        if not counted:
            out["informational"] += 1
        elif failed:
            out["failed"] += 1
        else:
            out["passed"] += 1
    return out
