"""Report types shared by the checking modules."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    """A single failed relation: identifier, indices, deviation magnitude."""

    relation: str
    indices: tuple
    deviation: float

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "indices": [int(i) for i in self.indices],
            "deviation": float(self.deviation),
        }


@dataclass
class CheckReport:
    """Outcome of a relation check: passed iff the violation list is empty.

    ``details`` carries informational extras (generator ranks, advisory notes)
    that do not affect the pass/fail verdict.
    """

    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, relation: str, indices, deviation: float):
        self.violations.append(Violation(relation, tuple(indices), float(deviation)))

    def to_json(self) -> dict:
        out = {
            "passed": self.passed,
            "violations": [v.to_json() for v in self.violations],
        }
        if self.details:
            out["details"] = self.details
        return out
