"""Appliance runs, households and the plain (unshaped) meter synthesis."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from ..errors import SpecError, StorageError, WindowViolation
from ..storage import StorageUnit
from ..timeseries import Resource, TimeSeries

RESOURCES = (Resource.ELECTRICITY, Resource.WATER, Resource.GAS)


def _ro(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Appliance:
    """One schedulable run of an appliance.

    Every resource profile shares the same start slot, so shifting moves
    electricity, water and gas together. ``label`` groups runs of the same
    physical appliance (all HVAC cycles share ``label="HVAC"``) while
    ``name`` is unique within a household.
    """

    name: str
    profiles: Mapping[Resource, np.ndarray]
    original_start: int
    earliest_start: int | None = None
    latest_start: int | None = None
    shiftable: bool = False
    label: str = ""

    def __post_init__(self):
        if not self.profiles:
            raise SpecError(f"{self.name}: needs at least one resource profile")
        profiles = {}
        for res, prof in self.profiles.items():
            arr = _ro(prof)
            if arr.ndim != 1 or arr.size == 0:
                raise SpecError(f"{self.name}: empty profile for {res}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise SpecError(f"{self.name}: profile values must be finite and >= 0")
            profiles[Resource.parse(res)] = arr
        lengths = {p.size for p in profiles.values()}
        if len(lengths) != 1:
            raise SpecError(f"{self.name}: all resource profiles must share one duration")
        ordered = {r: profiles[r] for r in RESOURCES if r in profiles}
        object.__setattr__(self, "profiles", ordered)
        orig = int(self.original_start)
        object.__setattr__(self, "original_start", orig)
        if not self.shiftable:
            lo = hi = orig
        else:
            lo = orig if self.earliest_start is None else int(self.earliest_start)
            hi = orig if self.latest_start is None else int(self.latest_start)
        object.__setattr__(self, "earliest_start", lo)
        object.__setattr__(self, "latest_start", hi)
        if not lo <= orig <= hi:
            raise SpecError(f"{self.name}: need earliest_start <= original_start <= latest_start, "
                            f"got {lo} <= {orig} <= {hi}")
        if lo < 0:
            raise SpecError(f"{self.name}: earliest_start must be >= 0")
        if not self.label:
            object.__setattr__(self, "label", self.name)

    @property
    def duration(self) -> int:
        return next(iter(self.profiles.values())).size

    @property
    def resources(self) -> tuple[Resource, ...]:
        return tuple(self.profiles)

    @property
    def window(self) -> range:
        return range(self.earliest_start, self.latest_start + 1)

    def amplitude(self, resource: Resource) -> float:
        return float(self.profiles[resource].max())


@dataclass(frozen=True, eq=False)
class Household:
    appliances: tuple[Appliance, ...]
    base_load: Mapping[Resource, TimeSeries]
    storage: tuple[StorageUnit, ...] = ()
    horizon_slots: int = 1440
    slot_seconds: int = 60
    start_epoch: int = 0
    _index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        T, slot = int(self.horizon_slots), int(self.slot_seconds)
        object.__setattr__(self, "horizon_slots", T)
        object.__setattr__(self, "slot_seconds", slot)
        object.__setattr__(self, "appliances", tuple(self.appliances))
        object.__setattr__(self, "storage", tuple(self.storage))
        base = {}
        for res in RESOURCES:
            s = self.base_load.get(res)
            if s is None:
                s = TimeSeries(res, np.zeros(T), slot, self.start_epoch)
            if len(s) != T or s.slot_seconds != slot:
                raise SpecError(f"base load for {res.value} does not match the horizon")
            base[res] = s
        object.__setattr__(self, "base_load", base)

        names = [a.name for a in self.appliances]
        if len(set(names)) != len(names):
            raise SpecError("appliance names must be unique")
        for a in self.appliances:
            if a.latest_start + a.duration > T:
                raise SpecError(f"{a.name}: latest_start + duration ({a.latest_start} + "
                                f"{a.duration}) exceeds the horizon of {T} slots")
        seen = set()
        for unit in self.storage:
            if unit.resource is Resource.GAS:
                raise StorageError("gas storage is not permitted")
            if unit.resource in seen:
                raise StorageError(f"at most one storage unit per resource ({unit.resource.value})")
            seen.add(unit.resource)
        object.__setattr__(self, "_index", {a.name: i for i, a in enumerate(self.appliances)})

    # -- lookup -------------------------------------------------------------

    def appliance(self, name: str) -> Appliance:
        return self.appliances[self._index[name]]

    @property
    def labels(self) -> tuple[str, ...]:
        out = []
        for a in self.appliances:
            if a.label not in out:
                out.append(a.label)
        return tuple(out)

    def runs_of(self, label: str) -> tuple[Appliance, ...]:
        return tuple(a for a in self.appliances if a.label == label)

    def label_resources(self, label: str) -> tuple[Resource, ...]:
        res = {r for a in self.runs_of(label) for r in a.resources}
        return tuple(r for r in RESOURCES if r in res)

    def storage_for(self, resource: Resource) -> StorageUnit | None:
        for unit in self.storage:
            if unit.resource is resource:
                return unit
        return None

    @property
    def original_starts(self) -> dict[str, int]:
        return {a.name: a.original_start for a in self.appliances}

    def with_storage(self, *units: StorageUnit) -> "Household":
        return replace(self, storage=tuple(units))

    # -- synthesis ----------------------------------------------------------

    def check_starts(self, starts: Mapping[str, int] | None) -> dict[str, int]:
        """Complete ``starts`` with original starts and validate windows."""
        out = self.original_starts
        if starts:
            for name, s in starts.items():
                if name not in self._index:
                    raise WindowViolation(f"unknown appliance {name!r}")
                out[name] = int(s)
        for a in self.appliances:
            s = out[a.name]
            if not a.earliest_start <= s <= a.latest_start:
                raise WindowViolation(f"{a.name}: start {s} outside window "
                                      f"[{a.earliest_start}, {a.latest_start}]")
        return out

    def placed(self, appliance: Appliance, resource: Resource, start: int) -> np.ndarray:
        out = np.zeros(self.horizon_slots)
        prof = appliance.profiles.get(resource)
        if prof is not None:
            out[start:start + prof.size] = prof
        return out

    def demand(self, resource: Resource, starts: Mapping[str, int]) -> np.ndarray:
        """Raw (unshaped) demand of one resource for a start assignment."""
        out = np.array(self.base_load[resource].values, dtype=float)
        for a in self.appliances:
            prof = a.profiles.get(resource)
            if prof is not None:
                s = starts[a.name]
                out[s:s + prof.size] += prof
        return out

    def label_series(self, label: str, resource: Resource,
                     starts: Mapping[str, int] | None = None) -> TimeSeries:
        """Consumption of every run of ``label`` on ``resource``."""
        starts = self.check_starts(starts)
        out = np.zeros(self.horizon_slots)
        for a in self.runs_of(label):
            prof = a.profiles.get(resource)
            if prof is not None:
                s = starts[a.name]
                out[s:s + prof.size] += prof
        return self.series(resource, out)

    def ground_truth_runs(self, label: str, starts: Mapping[str, int] | None = None,
                          resource: Resource | None = None) -> list[tuple[int, int]]:
        """``(start, end)`` slot pairs (end exclusive) of every run of ``label``."""
        starts = self.check_starts(starts)
        runs = []
        for a in self.runs_of(label):
            if resource is not None and resource not in a.profiles:
                continue
            s = starts[a.name]
            runs.append((s, s + a.duration))
        return sorted(runs)

    def series(self, resource: Resource, values) -> TimeSeries:
        return TimeSeries(resource, values, self.slot_seconds, self.start_epoch)

    def fingerprint(self) -> str:
        """Stable digest of the household's data (not its storage)."""
        h = hashlib.sha256()
        h.update(f"{self.horizon_slots}:{self.slot_seconds}:{self.start_epoch}".encode())
        for res in RESOURCES:
            h.update(res.value.encode())
            h.update(np.ascontiguousarray(self.base_load[res].values).tobytes())
        for a in self.appliances:
            h.update(f"{a.name}|{a.label}|{a.original_start}|{a.earliest_start}|"
                     f"{a.latest_start}|{a.shiftable}".encode())
            for res, prof in a.profiles.items():
                h.update(res.value.encode())
                h.update(np.ascontiguousarray(prof).tobytes())
        return h.hexdigest()


def synthesize_metered(h: Household, starts: Mapping[str, int] | None = None
                       ) -> dict[Resource, TimeSeries]:
    """Metered streams with no shaping: base load plus every placed profile."""
    starts = h.check_starts(starts)
    return {res: h.series(res, h.demand(res, starts)) for res in RESOURCES}
