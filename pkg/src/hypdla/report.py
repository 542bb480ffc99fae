"""Pass/fail bookkeeping shared by the verification suites."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        s = f"[{status}] {self.name}: value={_short(self.value)}"
        if self.threshold is not None:
            s += f" threshold={_short(self.threshold)}"
        return s


@dataclass
class SuiteReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, value=None, threshold=None, **detail) -> Check:
        c = Check(name, bool(passed), value, threshold, detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def text(self) -> str:
        lines = [f"suite {self.name}: {'PASS' if self.passed else 'FAIL'} "
                 f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)"]
        lines += ["  " + c.line() for c in self.checks]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "meta": _clean(self.meta),
                "checks": [{"name": c.name, "passed": c.passed, "value": _clean(c.value),
                            "threshold": _clean(c.threshold), "detail": _clean(c.detail)} for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)) and len(v) > 8:
        return f"[{', '.join(_short(x) for x in v[:8])}, ...]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _clean(v):
    """Make numpy scalars/arrays and non-finite floats JSON friendly."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "tolist"):
        return _clean(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v
