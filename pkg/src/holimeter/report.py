"""Per-case result record and its JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .privacy import AttackScore, MIReport
from .timeseries import Resource


@dataclass(frozen=True)
class CaseReport:
    """Everything one scenario yields: leakage, flatness and consumer burden.

    ``details`` holds case-specific extras (objective value, noise
    perturbation, downsampling factor) as plain JSON values.
    """

    case: str
    mi: MIReport
    attack: dict[Resource, AttackScore]
    tv: dict[Resource, float]
    discomfort_minutes: float
    cost: float
    solver_stats: dict
    household: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "household": self.household,
            "mi": self.mi.to_dict(),
            "attack": {r.value: a.to_dict() for r, a in self.attack.items()},
            "tv": {r.value: v for r, v in self.tv.items()},
            "discomfort_minutes": self.discomfort_minutes,
            "cost": self.cost,
            "solver_stats": dict(self.solver_stats),
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CaseReport":
        return cls(
            case=str(d["case"]),
            mi=MIReport.from_dict(d["mi"]),
            attack={Resource.parse(r): AttackScore.from_dict(a) for r, a in d["attack"].items()},
            tv={Resource.parse(r): float(v) for r, v in d["tv"].items()},
            discomfort_minutes=float(d["discomfort_minutes"]),
            cost=float(d["cost"]),
            solver_stats=dict(d["solver_stats"]),
            household=str(d.get("household", "")),
            details=dict(d.get("details", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CaseReport":
        return cls.from_dict(json.loads(text))


__all__ = ["CaseReport"]
