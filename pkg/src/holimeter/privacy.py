"""Leakage metrics: histogram mutual information, an edge-detecting NIALM
attacker and its scoring, plus the consumer-side discomfort and cost."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import KeyMismatch, LengthMismatch
from .household.model import Household
from .timeseries import Resource, TimeSeries, _as_array, quantize

DEFAULT_BINS = 16


# -- mutual information --------------------------------------------------------

def _entropy_of_counts(counts: np.ndarray) -> float:
    c = np.sort(counts[counts > 0]).astype(float)
    if c.size <= 1:
        return 0.0
    p = c / c.sum()
    return float(-np.sum(p * np.log2(p)))


def _check_pair(x, y, bins):
    a, b = _as_array(x), _as_array(y)
    if a.size != b.size:
        raise LengthMismatch(f"series lengths differ ({a.size} vs {b.size})")
    if a.size < bins:
        raise ValueError(f"need at least {bins} samples for {bins} bins, got {a.size}")
    return a, b


def entropy(x, bins: int = DEFAULT_BINS) -> float:
    """Shannon entropy in bits of the equal-width quantization of ``x``."""
    q = quantize(x, bins)
    return _entropy_of_counts(np.bincount(q, minlength=bins))


def mutual_information(x, y, bins: int = DEFAULT_BINS) -> float:
    """Histogram estimate of I(x; y) in bits.

    Computed as H(x) + H(y) - H(x, y) with probabilities summed in sorted
    order, which makes I(x, x) == H(x) and I(x, const) == 0 hold exactly.
    """
    a, b = _check_pair(x, y, bins)
    qa, qb = quantize(a, bins), quantize(b, bins)
    hx = _entropy_of_counts(np.bincount(qa, minlength=bins))
    hy = _entropy_of_counts(np.bincount(qb, minlength=bins))
    hxy = _entropy_of_counts(np.bincount(qa * bins + qb, minlength=bins * bins))
    mi = hx + hy - hxy
    return float(min(max(mi, 0.0), hx, hy))


@dataclass(frozen=True)
class MIEntry:
    appliance: str
    resource: Resource
    mi_bits: float
    bins: int

    def to_dict(self) -> dict:
        return {"appliance": self.appliance, "resource": self.resource.value,
                "mi_bits": self.mi_bits, "bins": self.bins}

    @classmethod
    def from_dict(cls, d: Mapping) -> "MIEntry":
        return cls(str(d["appliance"]), Resource.parse(d["resource"]), float(d["mi_bits"]),
                   int(d["bins"]))


@dataclass(frozen=True)
class MIReport:
    entries: tuple[MIEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for e in self.entries:
            if not 0.0 <= e.mi_bits <= math.log2(e.bins) + 1e-12:
                raise ValueError(f"MI of {e.appliance}/{e.resource.value} out of range")

    def get(self, appliance: str, resource) -> float:
        r = Resource.parse(resource)
        for e in self.entries:
            if e.appliance == appliance and e.resource is r:
                return e.mi_bits
        raise KeyError((appliance, r.value))

    def to_dict(self) -> list:
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_dict(cls, d: Iterable[Mapping]) -> "MIReport":
        return cls(tuple(MIEntry.from_dict(e) for e in d))


def mi_report(h: Household, starts: Mapping[str, int], metered: Mapping[Resource, TimeSeries],
              bins: int = DEFAULT_BINS) -> MIReport:
    """MI between every appliance label's own stream and its metered resource."""
    entries = []
    for label in h.labels:
        for r in h.label_resources(label):
            mi = mutual_information(h.label_series(label, r, starts), metered[r], bins)
            entries.append(MIEntry(label, r, mi, bins))
    return MIReport(tuple(entries))


# -- edge attacker -------------------------------------------------------------

class EventKind(str, enum.Enum):
    ON = "On"
    OFF = "Off"


@dataclass(frozen=True)
class NialmEvent:
    slot: int
    kind: EventKind
    magnitude: float
    matched_appliance: str | None = None

    def __post_init__(self):
        if not self.magnitude > 0:
            raise ValueError("event magnitude must be > 0")


@dataclass(frozen=True)
class Signature:
    appliance: str
    magnitude: float


def signatures_for(h: Household, resource: Resource) -> list[Signature]:
    """Step size of each appliance label on ``resource`` (its peak rate)."""
    out = []
    for label in h.labels:
        amps = [a.amplitude(resource) for a in h.runs_of(label) if resource in a.profiles]
        if amps:
            out.append(Signature(label, float(max(amps))))
    return out


def edge_attack(metered, signatures: Sequence[Signature], theta: float,
                match_tol: float = 0.2) -> list[NialmEvent]:
    """Report every step larger than ``theta`` and label it by magnitude.

    Slot ``t`` carries the step ``m[t] - m[t-1]`` (0-based). A step is
    attributed to the signature closest in magnitude if it lies within
    ``match_tol`` relative to that signature; ties go to the earlier one.
    """
    if not theta > 0:
        raise ValueError("theta must be > 0")
    if not 0 < match_tol < 1:
        raise ValueError("match_tol must lie in (0, 1)")
    m = _as_array(metered)
    diff = np.diff(m)
    events = []
    for i in np.flatnonzero(np.abs(diff) > theta):
        d = float(diff[i])
        mag = abs(d)
        match, best = None, math.inf
        for sig in signatures:
            err = abs(mag - sig.magnitude)
            if err <= match_tol * sig.magnitude and err < best:
                match, best = sig.appliance, err
        events.append(NialmEvent(int(i) + 1, EventKind.ON if d > 0 else EventKind.OFF,
                                 mag, match))
    return events


@dataclass(frozen=True)
class ApplianceScore:
    appliance: str
    true_edges: int
    detected: int
    matched: int

    @property
    def recall(self) -> float:
        return self.matched / self.true_edges if self.true_edges else 1.0

    @property
    def precision(self) -> float:
        return self.matched / self.detected if self.detected else 1.0

    def to_dict(self) -> dict:
        return {"appliance": self.appliance, "true_edges": self.true_edges,
                "detected": self.detected, "matched": self.matched,
                "recall": self.recall, "precision": self.precision}


@dataclass(frozen=True)
class AttackScore:
    per_appliance: tuple[ApplianceScore, ...] = ()
    unmatched_events: int = 0

    def __post_init__(self):
        object.__setattr__(self, "per_appliance", tuple(self.per_appliance))

    def __getitem__(self, appliance: str) -> ApplianceScore:
        for s in self.per_appliance:
            if s.appliance == appliance:
                return s
        raise KeyError(appliance)

    @property
    def true_edges(self) -> int:
        return sum(s.true_edges for s in self.per_appliance)

    @property
    def matched(self) -> int:
        return sum(s.matched for s in self.per_appliance)

    @property
    def detected(self) -> int:
        return sum(s.detected for s in self.per_appliance)

    @property
    def recall(self) -> float:
        return self.matched / self.true_edges if self.true_edges else 1.0

    @property
    def precision(self) -> float:
        # events matched to no signature count as false alarms too
        det = self.detected + self.unmatched_events
        return self.matched / det if det else 1.0

    def to_dict(self) -> dict:
        return {"per_appliance": [s.to_dict() for s in self.per_appliance],
                "unmatched_events": self.unmatched_events,
                "recall": self.recall, "precision": self.precision}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AttackScore":
        per = tuple(ApplianceScore(str(s["appliance"]), int(s["true_edges"]),
                                   int(s["detected"]), int(s["matched"]))
                    for s in d["per_appliance"])
        return cls(per, int(d.get("unmatched_events", 0)))


def true_edges(runs: Iterable[tuple[int, int]], horizon: int | None = None
               ) -> list[tuple[int, EventKind]]:
    """On/Off edge slots of ``(start, end)`` runs, end exclusive.

    An edge at slot 0 or at ``horizon`` has no neighbouring sample inside the
    series and is left out.
    """
    out = []
    for s, e in runs:
        if s > 0:
            out.append((int(s), EventKind.ON))
        if horizon is None or e < horizon:
            out.append((int(e), EventKind.OFF))
    return sorted(out, key=lambda p: (p[0], p[1].value))


def score_attack(events: Sequence[NialmEvent],
                 ground_truth_runs: Mapping[str, Iterable[tuple[int, int]]],
                 horizon: int | None = None, slot_tolerance: int = 1) -> AttackScore:
    """Match attributed events one-to-one with true edges.

    A true edge counts as recalled when an unused event of the same kind,
    attributed to the same appliance, lies within ``slot_tolerance`` slots
    (nearest first, then earliest).
    """
    scores = []
    for app, runs in ground_truth_runs.items():
        edges = true_edges(runs, horizon)
        mine = [e for e in events if e.matched_appliance == app]
        used = [False] * len(mine)
        hit = 0
        for slot, kind in edges:
            best, best_d = None, slot_tolerance + 1
            for j, ev in enumerate(mine):
                if used[j] or ev.kind is not kind:
                    continue
                d = abs(ev.slot - slot)
                if d < best_d:
                    best, best_d = j, d
            if best is not None:
                used[best] = True
                hit += 1
        scores.append(ApplianceScore(app, len(edges), len(mine), hit))
    known = set(ground_truth_runs)
    stray = sum(1 for e in events if e.matched_appliance not in known)
    return AttackScore(tuple(scores), stray)


def attack_resource(h: Household, starts: Mapping[str, int], metered: TimeSeries,
                    theta: float, match_tol: float = 0.2) -> AttackScore:
    """Run the edge attacker on one metered stream and score it.

    Only appliances whose step exceeds ``theta`` are scored; the others
    cannot be seen by this attacker at all.
    """
    r = metered.resource
    sigs = signatures_for(h, r)
    events = edge_attack(metered, sigs, theta, match_tol)
    truth = {s.appliance: h.ground_truth_runs(s.appliance, starts, r)
             for s in sigs if s.magnitude > theta}
    return score_attack(events, truth, horizon=len(metered))


# -- consumer side -------------------------------------------------------------

def discomfort(starts: Mapping[str, int], original_starts: Mapping[str, int],
               slot_seconds: int = 60) -> float:
    """Total start displacement in minutes."""
    if set(starts) != set(original_starts):
        raise KeyMismatch("starts and original starts cover different appliances")
    slots = sum(abs(int(starts[k]) - int(original_starts[k])) for k in starts)
    return slots * slot_seconds / 60.0


def energy_cost(metered_electricity, tariff, slot_seconds: int | None = None) -> float:
    """``sum_t m[t] * slot_hours * tariff[t]``; a length-1 tariff is flat."""
    if slot_seconds is None:
        slot_seconds = getattr(metered_electricity, "slot_seconds", 60)
    m = _as_array(metered_electricity)
    p = np.atleast_1d(np.asarray(tariff, dtype=float))
    if p.size not in (1, m.size):
        raise LengthMismatch(f"tariff has {p.size} entries, expected 1 or {m.size}")
    return float(np.sum(m * p) * slot_seconds / 3600.0)


__all__ = [
    "DEFAULT_BINS", "entropy", "mutual_information", "MIEntry", "MIReport", "mi_report",
    "EventKind", "NialmEvent", "Signature", "signatures_for", "edge_attack",
    "ApplianceScore", "AttackScore", "true_edges", "score_attack", "attack_resource",
    "discomfort", "energy_cost",
]
