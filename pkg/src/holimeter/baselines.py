"""Non-shaping privacy baselines: coarser reporting and additive noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .household.model import RESOURCES
from .timeseries import Resource, TimeSeries, resample_average

DISTRIBUTIONS = ("laplace", "gaussian")


def downsample_baseline(metered: Mapping[Resource, TimeSeries], k: int
                        ) -> dict[Resource, TimeSeries]:
    """Report k-slot averages of every stream."""
    return {r: resample_average(s, k) for r, s in metered.items()}


def coarse_runs(runs, k: int) -> list[tuple[int, int]]:
    """Map fine ``(start, end)`` runs onto the k-slot grid (covering windows)."""
    return [(s // k, -(-e // k)) for s, e in runs]


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. additive noise; ``scale`` is the Laplace b or the Gaussian sigma.

    ``scale`` may be one number for every resource or a per-resource map.
    """

    distribution: str = "laplace"
    scale: float | Mapping = 0.1
    seed: int = 0

    def __post_init__(self):
        dist = str(self.distribution).lower()
        if dist not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        object.__setattr__(self, "distribution", dist)
        if isinstance(self.scale, Mapping):
            scale = {Resource.parse(k): float(v) for k, v in self.scale.items()}
            vals = list(scale.values())
        else:
            scale = float(self.scale)
            vals = [scale]
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("noise scale must be finite and > 0")
        object.__setattr__(self, "scale", scale)

    def scale_for(self, r: Resource) -> float | None:
        if isinstance(self.scale, dict):
            return self.scale.get(r)
        return self.scale

    def to_dict(self) -> dict:
        scale = ({r.value: v for r, v in self.scale.items()}
                 if isinstance(self.scale, dict) else self.scale)
        return {"distribution": self.distribution, "scale": scale, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "NoiseSpec":
        return cls(**d)


def noise_draws(spec: NoiseSpec, resource: Resource, n: int) -> np.ndarray:
    """The raw noise added to ``resource``; each resource has its own stream."""
    scale = spec.scale_for(resource)
    if scale is None:
        return np.zeros(n)
    idx = RESOURCES.index(resource)
    rng = np.random.default_rng([int(spec.seed), idx])
    if spec.distribution == "laplace":
        return rng.laplace(0.0, scale, n)
    return rng.normal(0.0, scale, n)


def obfuscate(metered: Mapping[Resource, TimeSeries], spec: NoiseSpec
              ) -> dict[Resource, TimeSeries]:
    """Add seeded noise to each stream and clamp at zero.

    Resources missing from a per-resource scale map pass through unchanged.
    """
    out = {}
    for r, s in metered.items():
        noisy = np.asarray(s.values) + noise_draws(spec, r, len(s))
        out[r] = s.with_values(np.maximum(noisy, 0.0))
    return out


def mean_abs_perturbation(original: Mapping[Resource, TimeSeries],
                          perturbed: Mapping[Resource, TimeSeries]) -> dict[Resource, float]:
    return {r: float(np.mean(np.abs(np.asarray(perturbed[r].values)
                                    - np.asarray(original[r].values))))
            for r in original}


__all__ = ["downsample_baseline", "coarse_runs", "NoiseSpec", "noise_draws", "obfuscate",
           "mean_abs_perturbation"]
