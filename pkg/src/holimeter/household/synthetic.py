"""Seeded one-day synthetic household.

The default household mirrors the two multi-resource appliances studied
in the case analysis: a furnace/HVAC (fan electricity plus burner gas,
short cycles through the day) and a washing machine (motor electricity
plus water, two cycles). Unmodelled consumption goes into the base load.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import SpecError
from ..timeseries import Resource, TimeSeries
from .model import RESOURCES, Appliance, Household

# Rejection sampling budget for edge separation.
_MAX_PLACEMENT_TRIES = 200


@dataclass(frozen=True)
class ApplianceSpec:
    """Rectangular-pulse appliance: ``runs`` cycles of ``duration`` slots.

    Nominal starts are spread evenly over ``span`` and perturbed by a
    uniform jitter of up to ``jitter`` slots. Each run may move
    ``shift_before`` slots earlier and ``shift_after`` later, clipped to the
    absolute ``[earliest_start, latest_start]`` bounds when those are set.
    """

    label: str
    amplitudes: dict
    duration: int
    runs: int
    jitter: int = 0
    span: tuple[int, int] | None = None
    shiftable: bool = True
    shift_before: int = 0
    shift_after: int = 0
    earliest_start: int | None = None
    latest_start: int | None = None

    def __post_init__(self):
        amps = {Resource.parse(r): float(v) for r, v in dict(self.amplitudes).items()}
        object.__setattr__(self, "amplitudes", amps)
        if self.span is not None:
            object.__setattr__(self, "span", tuple(int(x) for x in self.span))


@dataclass(frozen=True)
class PulseTrain:
    """Non-shiftable pulses folded into the base load (e.g. faucets)."""

    amplitude: float
    duration: int
    count: int


@dataclass(frozen=True)
class BaseSpec:
    level: float = 0.0
    diurnal: float = 0.0
    noise: float = 0.0
    pulses: tuple[PulseTrain, ...] = ()

    def __post_init__(self):
        trains = tuple(p if isinstance(p, PulseTrain) else PulseTrain(**p) for p in self.pulses)
        object.__setattr__(self, "pulses", trains)


@dataclass(frozen=True)
class SyntheticSpec:
    horizon: int = 1440
    slot_seconds: int = 60
    appliances: tuple[ApplianceSpec, ...] = ()
    base: dict = field(default_factory=dict)
    min_edge_gap: int = 2
    start_epoch: int = 0

    def __post_init__(self):
        apps = tuple(a if isinstance(a, ApplianceSpec) else ApplianceSpec(**a)
                     for a in self.appliances)
        object.__setattr__(self, "appliances", apps)
        base = {}
        for r, b in dict(self.base).items():
            base[Resource.parse(r)] = b if isinstance(b, BaseSpec) else BaseSpec(**b)
        object.__setattr__(self, "base", base)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["appliances"] = [
            {**asdict(a), "amplitudes": {r.value: v for r, v in a.amplitudes.items()},
             "span": list(a.span) if a.span else None}
            for a in self.appliances
        ]
        d["base"] = {r.value: asdict(b) for r, b in self.base.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        return cls(**d)


def default_spec() -> SyntheticSpec:
    """One day at one-minute resolution with an HVAC and a washing machine.

    The base gas load stands for the other burners in the house (water
    heater, range) firing at the furnace's rate; the base water load holds
    faucet draws and two showers.
    """
    hvac = ApplianceSpec(
        label="HVAC",
        amplitudes={Resource.ELECTRICITY: 0.5, Resource.GAS: 1.5},
        duration=10, runs=15, jitter=20, span=(0, 1430),
        shift_before=60, shift_after=60,
    )
    wm = ApplianceSpec(
        label="WM",
        amplitudes={Resource.ELECTRICITY: 1.2, Resource.WATER: 1.5},
        duration=45, runs=2, jitter=30, span=(480, 1260),
        shift_before=180, shift_after=180,
    )
    base = {
        Resource.ELECTRICITY: BaseSpec(level=0.35, diurnal=0.1, noise=0.01),
        Resource.WATER: BaseSpec(pulses=(PulseTrain(3.0, 2, 30), PulseTrain(8.0, 8, 2))),
        Resource.GAS: BaseSpec(noise=0.005, pulses=(PulseTrain(1.5, 10, 96),)),
    }
    return SyntheticSpec(appliances=(hvac, wm), base=base)


def _nominal_starts(spec: ApplianceSpec, horizon: int) -> np.ndarray:
    lo, hi = spec.span if spec.span is not None else (0, horizon - spec.duration)
    frac = (np.arange(spec.runs) + 0.5) / spec.runs
    return np.floor(lo + frac * (hi - lo)).astype(int)


def _check_spec(spec: SyntheticSpec) -> None:
    T = spec.horizon
    if T < 1 or spec.slot_seconds < 1:
        raise SpecError("horizon and slot_seconds must be positive")
    labels = set()
    for a in spec.appliances:
        if a.label in labels:
            raise SpecError(f"duplicate appliance label {a.label!r}")
        labels.add(a.label)
        if not a.amplitudes or any(v <= 0 for v in a.amplitudes.values()):
            raise SpecError(f"{a.label}: amplitudes must be positive and non-empty")
        if a.duration < 1 or a.runs < 0 or a.jitter < 0:
            raise SpecError(f"{a.label}: duration >= 1, runs >= 0, jitter >= 0 required")
        if a.duration > T:
            raise SpecError(f"{a.label}: duration exceeds the horizon")
        if a.shift_before < 0 or a.shift_after < 0:
            raise SpecError(f"{a.label}: shift limits must be >= 0")
        if a.latest_start is not None and a.latest_start + a.duration > T:
            raise SpecError(f"{a.label}: latest_start + duration ({a.latest_start} + "
                            f"{a.duration}) exceeds the horizon of {T} slots")
        if a.earliest_start is not None and a.earliest_start < 0:
            raise SpecError(f"{a.label}: earliest_start must be >= 0")
        if (a.earliest_start is not None and a.latest_start is not None
                and a.earliest_start > a.latest_start):
            raise SpecError(f"{a.label}: earliest_start > latest_start")
        if a.span is not None:
            lo, hi = a.span
            if not 0 <= lo <= hi <= T - a.duration:
                raise SpecError(f"{a.label}: span {a.span} must lie within "
                                f"[0, {T - a.duration}]")
    for res, b in spec.base.items():
        for p in b.pulses:
            if p.amplitude < 0 or p.duration < 1 or p.count < 0:
                raise SpecError(f"base {res.value}: invalid pulse train {p}")
            if p.count > T // p.duration:
                raise SpecError(f"base {res.value}: {p.count} pulses of {p.duration} "
                                f"slots do not fit in {T} slots")


def _edges_separated(starts_by_app, spec: SyntheticSpec) -> bool:
    if spec.min_edge_gap <= 0:
        return True
    edges = []
    for a, starts in zip(spec.appliances, starts_by_app):
        for s in starts:
            edges.extend((s, s + a.duration))
    edges = np.sort(np.array(edges, dtype=int))
    if edges.size < 2:
        return True
    return bool(np.all(np.diff(edges) >= spec.min_edge_gap))


def _base_series(rng: np.random.Generator, b: BaseSpec, T: int) -> np.ndarray:
    t = np.arange(T)
    # one cosine per day, trough at 04:00 for a 1440-slot day
    out = np.full(T, b.level) - b.diurnal * np.cos(2 * np.pi * (t - T / 6) / T)
    if b.noise > 0:
        out = out + rng.normal(0.0, b.noise, T)
    for p in b.pulses:
        cells = T // p.duration
        chosen = np.sort(rng.choice(cells, size=p.count, replace=False))
        for c in chosen:
            out[c * p.duration:(c + 1) * p.duration] += p.amplitude
    return np.clip(out, 0.0, None)


def generate_synthetic_day(seed: int, spec: SyntheticSpec | None = None) -> Household:
    """Build a deterministic household from ``seed`` and ``spec``.

    Integrated consumption per appliance and resource is exactly
    amplitude x duration x runs. Runs of a multi-resource appliance start
    at the same slot on every resource.
    """
    spec = default_spec() if spec is None else spec
    _check_spec(spec)
    T = spec.horizon
    rng = np.random.default_rng(seed)

    nominal = [_nominal_starts(a, T) for a in spec.appliances]
    for attempt in range(_MAX_PLACEMENT_TRIES):
        placed = []
        for a, nom in zip(spec.appliances, nominal):
            jit = rng.integers(-a.jitter, a.jitter + 1, size=a.runs) if a.jitter else 0
            placed.append(np.clip(nom + jit, 0, T - a.duration))
        if _edges_separated(placed, spec):
            break
    else:
        raise SpecError(f"could not place appliance runs with edges at least "
                        f"{spec.min_edge_gap} slots apart")

    appliances = []
    for a, starts in zip(spec.appliances, placed):
        for k, s in enumerate(starts):
            s = int(s)
            lo, hi = s, s
            if a.shiftable:
                lo = max(0, s - a.shift_before)
                hi = min(T - a.duration, s + a.shift_after)
                if a.earliest_start is not None:
                    lo = max(lo, a.earliest_start)
                if a.latest_start is not None:
                    hi = min(hi, a.latest_start)
                if not lo <= s <= hi:
                    raise SpecError(f"{a.label} run {k}: start {s} falls outside "
                                    f"its window [{lo}, {hi}]")
            profiles = {r: np.full(a.duration, amp) for r, amp in a.amplitudes.items()}
            appliances.append(Appliance(
                name=f"{a.label}#{k:02d}", label=a.label, profiles=profiles,
                original_start=s, earliest_start=lo, latest_start=hi,
                shiftable=a.shiftable,
            ))

    base = {}
    for res in RESOURCES:
        b = spec.base.get(res, BaseSpec())
        base[res] = TimeSeries(res, _base_series(rng, b, T), spec.slot_seconds, spec.start_epoch)

    return Household(appliances=tuple(appliances), base_load=base, horizon_slots=T,
                     slot_seconds=spec.slot_seconds, start_epoch=spec.start_epoch)
