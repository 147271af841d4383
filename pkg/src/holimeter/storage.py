"""Household storage: the battery and the water tank."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StorageError
from .timeseries import Resource


@dataclass(frozen=True)
class StorageUnit:
    """A lossy store on one resource.

    ``capacity`` and ``initial_level`` are in stored units (kWh for the
    battery, L for the tank); rates are in the resource's canonical unit.
    """

    resource: Resource
    capacity: float
    max_charge_rate: float
    max_discharge_rate: float
    charge_efficiency: float = 1.0
    discharge_efficiency: float = 1.0
    initial_level: float = 0.0
    name: str = ""

    def __post_init__(self):
        res = Resource.parse(self.resource)
        object.__setattr__(self, "resource", res)
        if res is Resource.GAS:
            raise StorageError("gas storage is not permitted: a household may "
                               "hold a battery and a water tank, never a gas tank")
        if not self.name:
            object.__setattr__(self, "name", "battery" if res is Resource.ELECTRICITY else "tank")
        if not self.capacity > 0:
            raise StorageError(f"{self.name}: capacity must be > 0")
        if not (self.max_charge_rate > 0 and self.max_discharge_rate > 0):
            raise StorageError(f"{self.name}: charge/discharge rates must be > 0")
        for label, eta in (("charge", self.charge_efficiency),
                           ("discharge", self.discharge_efficiency)):
            if not 0 < eta <= 1:
                raise StorageError(f"{self.name}: {label} efficiency must lie in (0, 1]")
        if not 0 <= self.initial_level <= self.capacity:
            raise StorageError(f"{self.name}: initial level must lie in [0, capacity]")

    @property
    def lossless(self) -> bool:
        return self.charge_efficiency == 1.0 and self.discharge_efficiency == 1.0

    def to_dict(self) -> dict:
        return {
            "resource": self.resource.value,
            "capacity": self.capacity,
            "max_charge_rate": self.max_charge_rate,
            "max_discharge_rate": self.max_discharge_rate,
            "charge_efficiency": self.charge_efficiency,
            "discharge_efficiency": self.discharge_efficiency,
            "initial_level": self.initial_level,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StorageUnit":
        return cls(**d)


def default_battery(**overrides) -> StorageUnit:
    """2 kWh home battery, 3 kW both ways, 95 % one-way efficiency, half full."""
    params = dict(resource=Resource.ELECTRICITY, capacity=2.0,
                  max_charge_rate=3.0, max_discharge_rate=3.0,
                  charge_efficiency=0.95, discharge_efficiency=0.95,
                  initial_level=1.0, name="battery")
    params.update(overrides)
    return StorageUnit(**params)


def default_tank(**overrides) -> StorageUnit:
    """200 L lossless water tank, 10 L/min fill and drain, half full."""
    params = dict(resource=Resource.WATER, capacity=200.0,
                  max_charge_rate=10.0, max_discharge_rate=10.0,
                  charge_efficiency=1.0, discharge_efficiency=1.0,
                  initial_level=100.0, name="tank")
    params.update(overrides)
    return StorageUnit(**params)
