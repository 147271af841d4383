"""Fixed-cadence metered streams and the small numeric helpers built on them.

All series are stored in canonical units: kW for electricity, L/min for
water and m3/h for gas. Each value is the average rate over its slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, LengthNotDivisible, NoOverlap

#: Relative spread below which a series counts as constant when quantizing.
#: Solver round-off on a flattened meter stream is ~1e-13.
FLAT_RTOL = 1e-9


class Resource(str, enum.Enum):
    ELECTRICITY = "electricity"
    WATER = "water"
    GAS = "gas"

    @property
    def unit(self) -> str:
        return _CANONICAL_UNIT[self]

    def volume_per_slot(self, slot_seconds: int) -> float:
        """Factor turning one slot at rate 1 into stored quantity.

        kW -> kWh and m3/h -> m3 integrate over hours; L/min -> L over minutes.
        """
        if self is Resource.WATER:
            return slot_seconds / 60.0
        return slot_seconds / 3600.0

    @classmethod
    def parse(cls, value: "str | Resource") -> "Resource":
        if isinstance(value, Resource):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown resource {value!r}; expected one of "
                             f"{[r.value for r in cls]}") from None


_CANONICAL_UNIT = {
    Resource.ELECTRICITY: "kW",
    Resource.WATER: "L/min",
    Resource.GAS: "m3/h",
}


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One resource sampled at a fixed cadence.

    ``values`` is a read-only float array of non-negative, finite rates.
    """

    resource: Resource
    values: np.ndarray
    slot_seconds: int = 60
    start_epoch: int = 0

    def __post_init__(self):
        object.__setattr__(self, "resource", Resource.parse(self.resource))
        vals = _frozen_array(self.values)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("a TimeSeries needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise ValueError("TimeSeries values must be finite")
        if np.any(vals < 0):
            raise ValueError(f"TimeSeries values must be >= 0 (min {vals.min()})")
        if int(self.slot_seconds) != self.slot_seconds or self.slot_seconds <= 0:
            raise ValueError("slot_seconds must be a positive integer")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "slot_seconds", int(self.slot_seconds))
        object.__setattr__(self, "start_epoch", int(self.start_epoch))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (self.resource is other.resource
                and self.slot_seconds == other.slot_seconds
                and self.start_epoch == other.start_epoch
                and np.array_equal(self.values, other.values))

    __hash__ = None

    @property
    def end_epoch(self) -> int:
        """Exclusive end of the covered interval, in epoch seconds."""
        return self.start_epoch + len(self) * self.slot_seconds

    @property
    def epochs(self) -> np.ndarray:
        return self.start_epoch + self.slot_seconds * np.arange(len(self))

    def integral(self) -> float:
        """Total energy / volume over the series, in canonical quantity units."""
        return float(self.values.sum()) * self.resource.volume_per_slot(self.slot_seconds)

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(self.resource, values, self.slot_seconds, self.start_epoch)


def _as_array(s) -> np.ndarray:
    return np.asarray(s.values if isinstance(s, TimeSeries) else s, dtype=float)


def total_variation(s) -> float:
    """Sum of absolute differences between adjacent slots (no wrap-around)."""
    v = _as_array(s)
    if v.size < 2:
        return 0.0
    return float(np.abs(np.diff(v)).sum())


def resample_average(s: TimeSeries, k: int) -> TimeSeries:
    """Average consecutive blocks of ``k`` slots into one coarser slot."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)
    n = len(s)
    if n % k:
        raise LengthNotDivisible(f"series length {n} is not divisible by {k}")
    if k == 1:
        return s
    coarse = s.values.reshape(n // k, k).mean(axis=1)
    return TimeSeries(s.resource, coarse, s.slot_seconds * k, s.start_epoch)


def quantize(s, bins: int) -> np.ndarray:
    """Map values to equal-width bin indices over ``[min, max]``.

    A (numerically) constant series maps to bin 0 everywhere; the maximum
    lands in ``bins - 1``.
    """
    if int(bins) != bins or bins < 2:
        raise ValueError("bins must be an integer >= 2")
    bins = int(bins)
    v = _as_array(s)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    if span <= FLAT_RTOL * max(1.0, abs(hi), abs(lo)):
        return np.zeros(v.size, dtype=np.int64)
    idx = np.floor((v - lo) / span * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def align_slice(a: TimeSeries, b: TimeSeries) -> tuple[TimeSeries, TimeSeries]:
    """Trim two series on the same slot grid to their common epoch window."""
    if a.slot_seconds != b.slot_seconds:
        raise GridMismatch(f"slot lengths differ: {a.slot_seconds} vs {b.slot_seconds}")
    slot = a.slot_seconds
    if (a.start_epoch - b.start_epoch) % slot:
        raise GridMismatch("series are offset by a non-integer number of slots")
    start = max(a.start_epoch, b.start_epoch)
    end = min(a.end_epoch, b.end_epoch)
    if end <= start:
        raise NoOverlap(f"[{a.start_epoch}, {a.end_epoch}) and "
                        f"[{b.start_epoch}, {b.end_epoch}) do not overlap")

    def cut(s: TimeSeries) -> TimeSeries:
        i = (start - s.start_epoch) // slot
        j = (end - s.start_epoch) // slot
        if i == 0 and j == len(s):
            return s
        return TimeSeries(s.resource, s.values[i:j], slot, start)

    return cut(a), cut(b)
