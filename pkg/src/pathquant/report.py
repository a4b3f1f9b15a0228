"""Residual reports: per-check records plus a deterministic serialized body.

The JSON layout has two top-level parts: `body` (suite name, scenario echo,
records, summary) which is byte-identical across reruns with the same
scenario and seed, and `timing` (wall-clock data) which is not.
"""

import csv
import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    claim: str
    value: float
    reference: float
    residual: float
    tolerance: float
    passed: bool
    runtime_ms: float = 0.0
    error: str = ""

    def body_dict(self):
        return {
            "check_id": self.check_id,
            "claim": self.claim,
            "value": self.value,
            "reference": self.reference,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "error": self.error,
        }


@dataclass
class ResidualReport:
    suite: str
    scenario: dict
    records: list = field(default_factory=list)
    timestamp: str = ""
    total_ms: float = 0.0

    def sorted_records(self):
        return sorted(self.records, key=lambda r: r.check_id)

    @property
    def summary(self):
        total = len(self.records)
        passed = sum(1 for r in self.records if r.passed)
        return {"total": total, "passed": passed, "failed": total - passed}

    @property
    def failed(self):
        return self.summary["failed"]

    def body(self):
        return {
            "suite": self.suite,
            "scenario": self.scenario,
            "records": [r.body_dict() for r in self.sorted_records()],
            "summary": self.summary,
        }

    def body_text(self):
        return json.dumps(self.body(), indent=2, sort_keys=True)

    def to_dict(self):
        return {
            "body": self.body(),
            "timing": {
                "timestamp": self.timestamp,
                "total_ms": self.total_ms,
                "per_check_ms": {r.check_id: r.runtime_ms for r in self.sorted_records()},
            },
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["check_id", "claim", "value", "reference", "residual", "tolerance", "passed"]
            )
            for r in self.sorted_records():
                writer.writerow(
                    [r.check_id, r.claim, r.value, r.reference, r.residual, r.tolerance, r.passed]
                )

    def print_lines(self, out=print):
        for r in self.sorted_records():
            status = "PASS" if r.passed else "FAIL"
            out(f"[{status}] {r.check_id:34s} residual={r.residual:.3e} tol={r.tolerance:.1e}")
        s = self.summary
        out(f"suite {self.suite!r}: {s['passed']}/{s['total']} passed, {s['failed']} failed")
