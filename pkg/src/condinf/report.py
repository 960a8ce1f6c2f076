"""Check results and reports, plus a JSON encoder for lattice values."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

SCHEMA_VERSION = 1


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: dict | None = None
    asserted: bool = True
    seconds: float | None = None

    def __bool__(self):
        return self.passed

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "verdict": "pass" if self.passed else "fail",
            "asserted": self.asserted,
            "witness": encode(self.witness),
        }
        if timing and self.seconds is not None:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True when every asserted check passed."""
        return all(c.passed for c in self.checks if c.asserted)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "passed": self.passed,
            "checks": [c.to_dict(timing) for c in self.checks],
            "summary": encode(self.summary),
        }

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)


def encode(obj: Any) -> Any:
    """Turn witnesses and lattice values into JSON-ready data.

    Rationals become strings so they round-trip exactly; infinities become
    ``"inf"``/``"-inf"``.
    """
    from .convex import Polytope2, encode_polytope
    from .lattice import NEG_END, POS_END

    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if obj is POS_END:
        return "inf"
    if obj is NEG_END:
        return "-inf"
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, Polytope2):
        return encode_polytope(obj)
    if isinstance(obj, frozenset):
        return sorted(obj, key=repr)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return encode(obj.item())
    return repr(obj)
