"""Load AMPds2-style minutely CSV exports into a :class:`Household`.

The data file has an ``epoch`` column followed by numeric readings. A JSON
mapping file says what each reading column is::

    {"gap_fill": "none",
     "columns": [
        {"column": "WHE", "role": "whole_house", "resource": "electricity", "unit": "W"},
        {"column": "FRE", "role": "HVAC", "resource": "electricity", "unit": "W",
         "shiftable": true, "earliest_start": 0, "latest_start": 1400, "max_shift": 60},
        {"column": "FRG", "role": "HVAC", "resource": "gas", "unit": "ft3/slot"}]}

A bare JSON array is accepted as the ``columns`` list. Roles are
``whole_house``, ``base`` or an appliance label. Each appliance column is
cut into runs (maximal spans where any of its columns is non-zero) and
every run becomes one schedulable :class:`Appliance`.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import GapError, NegativeResidualWarning, SchemaError, UnitError
from ..timeseries import Resource, TimeSeries
from .model import RESOURCES, Appliance, Household

_FT3_TO_M3 = 0.028316846592

_UNITS = {
    "kW": Resource.ELECTRICITY,
    "W": Resource.ELECTRICITY,
    "L/min": Resource.WATER,
    "L/slot": Resource.WATER,
    "m3/h": Resource.GAS,
    "ft3/slot": Resource.GAS,
}

_GAP_FILL = ("none", "hold-previous")


def to_canonical(values: np.ndarray, unit: str, slot_seconds: int) -> np.ndarray:
    """Convert raw readings in ``unit`` into the resource's canonical rate."""
    if unit == "kW" or unit == "L/min" or unit == "m3/h":
        return values
    if unit == "W":
        return values / 1000.0
    if unit == "L/slot":
        return values / (slot_seconds / 60.0)
    if unit == "ft3/slot":
        return values * _FT3_TO_M3 / (slot_seconds / 3600.0)
    raise UnitError(f"unknown unit tag {unit!r}; expected one of {sorted(_UNITS)}")


@dataclass(frozen=True)
class ColumnMap:
    column: str
    role: str
    resource: Resource
    unit: str
    shiftable: bool = False
    earliest_start: int | None = None
    latest_start: int | None = None
    max_shift: int | None = None


def read_mapping(path) -> tuple[list[ColumnMap], str]:
    """Parse a mapping file, returning its column entries and gap-fill rule."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read mapping {path}: {exc}") from exc
    gap_fill = "none"
    if isinstance(raw, dict):
        gap_fill = raw.get("gap_fill", "none")
        entries = raw.get("columns")
    else:
        entries = raw
    if gap_fill not in _GAP_FILL:
        raise SchemaError(f"gap_fill must be one of {_GAP_FILL}, got {gap_fill!r}")
    if not isinstance(entries, list) or not entries:
        raise SchemaError("mapping must list at least one column entry")
    out = []
    for i, e in enumerate(entries):
        if not isinstance(e, dict):
            raise SchemaError(f"mapping entry {i} is not an object")
        missing = [k for k in ("column", "role", "resource", "unit") if k not in e]
        if missing:
            raise SchemaError(f"mapping entry {i} lacks {missing}")
        try:
            res = Resource.parse(e["resource"])
        except ValueError as exc:
            raise SchemaError(f"mapping entry {i}: {exc}") from None
        unit = e["unit"]
        if unit not in _UNITS:
            raise UnitError(f"mapping entry {i}: unknown unit tag {unit!r}")
        if _UNITS[unit] is not res:
            raise UnitError(f"mapping entry {i}: unit {unit} does not measure {res.value}")
        unknown = set(e) - {"column", "role", "resource", "unit", "shiftable",
                            "earliest_start", "latest_start", "max_shift"}
        if unknown:
            raise SchemaError(f"mapping entry {i}: unknown keys {sorted(unknown)}")
        out.append(ColumnMap(column=str(e["column"]), role=str(e["role"]), resource=res,
                             unit=unit, shiftable=bool(e.get("shiftable", False)),
                             earliest_start=e.get("earliest_start"),
                             latest_start=e.get("latest_start"),
                             max_shift=e.get("max_shift")))
    cols = [m.column for m in out]
    if len(set(cols)) != len(cols):
        raise SchemaError("a data column is mapped twice")
    return out, gap_fill


def read_csv(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Return the epoch column and every other column as float arrays."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read data file {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "epoch":
        raise SchemaError(f"{path}: first header column must be 'epoch'")
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate header names")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric reading ({exc})") from None
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    epochs = data[:, 0]
    return epochs, {h: data[:, j] for j, h in enumerate(header) if j > 0}


def _regularize(epochs: np.ndarray, cols: dict[str, np.ndarray], gap_fill: str):
    # keep strictly increasing timestamps only
    keep = np.ones(epochs.size, dtype=bool)
    last = -np.inf
    for i, e in enumerate(epochs):
        if e <= last:
            keep[i] = False
        else:
            last = e
    epochs = epochs[keep].astype(np.int64)
    cols = {k: v[keep] for k, v in cols.items()}
    if epochs.size < 2:
        raise SchemaError("need at least two rows to infer the cadence")
    steps = np.diff(epochs)
    slot = int(steps.min())
    if slot <= 0:
        raise SchemaError("cannot infer a positive cadence")
    if np.any(steps % slot):
        raise GapError("timestamps are not on a fixed cadence")
    if np.all(steps == slot):
        return epochs, cols, slot
    if gap_fill != "hold-previous":
        bad = int(epochs[1:][steps != slot][0])
        raise GapError(f"missing slot(s) before epoch {bad}; enable gap_fill='hold-previous' "
                       f"in the mapping to fill them")
    full = np.arange(epochs[0], epochs[-1] + slot, slot)
    pos = np.searchsorted(epochs, full, side="right") - 1
    return full, {k: v[pos] for k, v in cols.items()}, slot


def _runs(active: np.ndarray) -> list[tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], active.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def load_ampds2_csv(data_path, mapping_path, window: tuple[int, int] | None = None
                    ) -> Household:
    """Ingest a CSV + mapping pair into a storage-less :class:`Household`.

    ``window = (start_slot, n_slots)`` optionally cuts a sub-range (e.g. one
    day) after gap handling. Negative residual base load is clamped to zero
    and reported through :class:`NegativeResidualWarning`.
    """
    mapping, gap_fill = read_mapping(mapping_path)
    epochs, cols = read_csv(data_path)
    for m in mapping:
        if m.column not in cols:
            raise SchemaError(f"mapped column {m.column!r} missing from {data_path}")
    epochs, cols, slot = _regularize(epochs, cols, gap_fill)
    if window is not None:
        start, n = int(window[0]), int(window[1])
        if start < 0 or n < 1 or start + n > epochs.size:
            raise SchemaError(f"window {window} outside the {epochs.size} available slots")
        epochs = epochs[start:start + n]
        cols = {k: v[start:start + n] for k, v in cols.items()}
    T = epochs.size
    series = {}
    for m in mapping:
        raw = cols[m.column]
        if np.any(~np.isfinite(raw)) or np.any(raw < 0):
            raise SchemaError(f"column {m.column!r} has negative or non-finite readings")
        series[m.column] = to_canonical(raw, m.unit, slot)

    whole, base_cols = {}, {}
    apps: dict[str, list[ColumnMap]] = {}
    for m in mapping:
        if m.role == "whole_house":
            if m.resource in whole:
                raise SchemaError(f"two whole_house columns for {m.resource.value}")
            whole[m.resource] = m
        elif m.role == "base":
            if m.resource in base_cols:
                raise SchemaError(f"two base columns for {m.resource.value}")
            base_cols[m.resource] = m
        else:
            if any(o.resource is m.resource for o in apps.get(m.role, [])):
                raise SchemaError(f"appliance {m.role!r} maps {m.resource.value} twice")
            apps.setdefault(m.role, []).append(m)
    for res in whole:
        if res in base_cols:
            raise SchemaError(f"{res.value}: give either a whole_house or a base column, not both")

    appliances = []
    for label, entries in apps.items():
        flags = {(e.shiftable, e.earliest_start, e.latest_start, e.max_shift) for e in entries}
        if len(flags) > 1:
            raise SchemaError(f"appliance {label!r}: conflicting shiftability settings")
        first = entries[0]
        active = np.zeros(T, dtype=bool)
        for e in entries:
            active |= series[e.column] > 0
        for k, (s, e_) in enumerate(_runs(active)):
            d = e_ - s
            lo = hi = s
            if first.shiftable:
                lo = 0 if first.earliest_start is None else max(0, int(first.earliest_start))
                hi = T - d if first.latest_start is None else min(int(first.latest_start), T - d)
                if first.max_shift is not None:
                    lo = max(lo, s - int(first.max_shift))
                    hi = min(hi, s + int(first.max_shift))
                if not lo <= s <= hi:
                    # run sits outside the allowed window: keep it where it is
                    lo = hi = s
            appliances.append(Appliance(
                name=f"{label}#{k:03d}", label=label,
                profiles={en.resource: series[en.column][s:e_] for en in entries},
                original_start=s, earliest_start=lo, latest_start=hi,
                shiftable=first.shiftable and lo < hi,
            ))

    base = {}
    for res in RESOURCES:
        app_sum = np.zeros(T)
        for entries in apps.values():
            for e in entries:
                if e.resource is res:
                    app_sum += series[e.column]
        if res in whole:
            resid = series[whole[res].column] - app_sum
            neg = np.flatnonzero(resid < 0)
            if neg.size:
                warnings.warn(NegativeResidualWarning(
                    f"{res.value}: whole-house minus appliances is negative at "
                    f"{neg.size} slot(s); clamped to 0", resource=res, slots=neg.tolist()),
                    stacklevel=2)
            vals = np.clip(resid, 0.0, None)
        elif res in base_cols:
            vals = series[base_cols[res].column]
        else:
            vals = np.zeros(T)
        base[res] = TimeSeries(res, vals, slot, int(epochs[0]))

    return Household(appliances=tuple(appliances), base_load=base, horizon_slots=T,
                     slot_seconds=slot, start_epoch=int(epochs[0]))
