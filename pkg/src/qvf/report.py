from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class VerificationReport:
    claim: str
    expectation: str
    observed: dict[str, Any]
    checks: dict[str, bool]
    verdict: str  # pass | fail | unknown
    provenance: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_checks(cls, claim, expectation, observed, checks, provenance=None, unknown=False) -> "VerificationReport":
        if unknown:
            verdict = "unknown"
        else:
            verdict = "pass" if all(checks.values()) else "fail"
        return cls(claim, expectation, observed, dict(checks), verdict, dict(provenance or {}))

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        d = json.loads(text)
        return cls(d["claim"], d["expectation"], d["observed"], d["checks"], d["verdict"], d.get("provenance", {}))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    def summary(self) -> str:
        lines = [f"[{self.verdict.upper()}] {self.claim}: {self.expectation}"]
        for name, ok in self.checks.items():
            lines.append(f"  {'ok  ' if ok else 'FAIL'} {name}")
        for key, val in self.observed.items():
            if key != "survivors_detail":
                lines.append(f"  {key}: {val}")
        return "\n".join(lines)
