"""Named residual checks and the report that collects them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool | None = None
    detail: str = ""

    def __post_init__(self):
        self.residual = float(self.residual)
        if self.passed is None:
            self.passed = math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_dict(self) -> dict:
        d = {"name": self.name, "residual": self.residual,
             "tolerance": self.tolerance, "pass": bool(self.passed)}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def add(self, name, residual, tolerance, passed=None, detail="") -> Check:
        c = Check(name, residual, tolerance, passed, detail)
        self.checks.append(c)
        return c

    def fail(self, name, detail) -> Check:
        return self.add(name, math.inf, 0.0, False, detail)

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)
        self.timings.update(other.timings)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def summary(self) -> dict:
        n_fail = sum(not c.passed for c in self.checks)
        return {"total": len(self.checks), "failed": n_fail, "pass": n_fail == 0}

    def to_dict(self, timings: bool = False) -> dict:
        d = {"checks": [c.to_dict() for c in self.checks], "summary": self.summary}
        if timings:
            d["timings"] = dict(self.timings)
        return d
