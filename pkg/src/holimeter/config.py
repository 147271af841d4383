"""Run configuration: a JSON document naming the input, cases and knobs.

Example::

    {
      "input": {"synthetic": {"spec": {}}},
      "cases": ["case0", "case1", "case2"],
      "storage": [{"resource": "electricity", "capacity": 2.0},
                  {"resource": "water"}],
      "seed": 0,
      "output": "out"
    }

CSV input instead reads ``{"csv": "data.csv", "mapping": "map.json",
"window": [start_slot, n_slots]}``; relative paths resolve against the
directory holding the config file.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .baselines import NoiseSpec
from .errors import ConfigError, HolimeterError
from .household import Household, SyntheticSpec, default_spec, generate_synthetic_day
from .household import load_ampds2_csv
from .shaper import CaseSettings, SolverSettings
from .storage import StorageUnit, default_battery, default_tank
from .timeseries import Resource

CASES = ("case0", "case1", "case2", "downsample", "obfuscate")
SEED_ENV = "HOLIMETER_SEED"

DEFAULT_THETA = {Resource.ELECTRICITY: 0.25, Resource.WATER: 0.5, Resource.GAS: 0.5}

_KEYS = {"input", "cases", "storage", "mi_bins", "attacker", "weights", "shift_in_case1",
         "cyclic_storage", "solver", "downsample_k", "noise", "tariff", "output", "seed",
         "energy_weight"}


@dataclass(frozen=True)
class SyntheticInput:
    spec: SyntheticSpec


@dataclass(frozen=True)
class CsvInput:
    csv: Path
    mapping: Path
    window: tuple[int, int] | None = None


@dataclass(frozen=True)
class RunConfig:
    input: SyntheticInput | CsvInput
    cases: tuple[str, ...]
    storage: tuple[StorageUnit, ...]
    mi_bins: int = 16
    theta: dict = field(default_factory=lambda: dict(DEFAULT_THETA))
    match_tol: float = 0.2
    weights: dict = field(default_factory=dict)
    shift_in_case1: bool = True
    cyclic_storage: bool = True
    solver: SolverSettings = SolverSettings()
    downsample_k: int = 15
    noise: dict | None = None
    tariff: Any = 1.0
    output: Path | None = None
    seed: int = 0
    energy_weight: float = 1.0

    def case_settings(self) -> CaseSettings:
        return CaseSettings(shift_in_case1=self.shift_in_case1, weights=dict(self.weights),
                            cyclic_storage=self.cyclic_storage, solver=self.solver,
                            energy_weight=self.energy_weight)

    def noise_spec(self, default_scale: Mapping[Resource, float]) -> NoiseSpec:
        """Noise settings, seeded from the run seed; scale falls back to
        ``default_scale`` per resource."""
        d = dict(self.noise or {})
        scale = d.get("scale", {r.value: v for r, v in default_scale.items()})
        return NoiseSpec(distribution=d.get("distribution", "laplace"), scale=scale,
                         seed=self.seed)

    def build_household(self) -> Household:
        if isinstance(self.input, SyntheticInput):
            h = generate_synthetic_day(self.seed, self.input.spec)
        else:
            h = load_ampds2_csv(self.input.csv, self.input.mapping, self.input.window)
        return h.with_storage(*self.storage)

    def to_dict(self) -> dict:
        if isinstance(self.input, SyntheticInput):
            inp = {"synthetic": {"spec": self.input.spec.to_dict()}}
        else:
            inp = {"csv": str(self.input.csv), "mapping": str(self.input.mapping),
                   "window": list(self.input.window) if self.input.window else None}
        return {
            "input": inp, "cases": list(self.cases),
            "storage": [u.to_dict() for u in self.storage],
            "mi_bins": self.mi_bins,
            "attacker": {"theta": {r.value: v for r, v in self.theta.items()},
                         "match_tol": self.match_tol},
            "weights": {Resource.parse(r).value: v for r, v in self.weights.items()},
            "shift_in_case1": self.shift_in_case1, "cyclic_storage": self.cyclic_storage,
            "solver": {"tolerance": self.solver.tolerance,
                       "exhaustive_limit": self.solver.exhaustive_limit,
                       "restarts": self.solver.restarts, "max_sweeps": self.solver.max_sweeps,
                       "max_iterations": self.solver.max_iterations},
            "downsample_k": self.downsample_k, "noise": self.noise, "tariff": self.tariff,
            "output": None if self.output is None else str(self.output), "seed": self.seed,
            "energy_weight": self.energy_weight,
        }


def _num(d, key, default, kind=float, positive=True):
    v = d.get(key, default)
    try:
        out = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None
    if isinstance(v, bool) or (kind is int and out != v):
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if kind is float and not math.isfinite(out):
        raise ConfigError(f"{key}: must be finite")
    if positive and not out > 0:
        raise ConfigError(f"{key}: must be > 0")
    return out


def _storage(raw) -> tuple[StorageUnit, ...]:
    if raw is None:
        return default_battery(), default_tank()
    if not isinstance(raw, list):
        raise ConfigError("storage: expected a list of storage units")
    units = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "resource" not in entry:
            raise ConfigError(f"storage[{i}]: needs a 'resource' field")
        params = dict(entry)
        try:
            r = Resource.parse(params.pop("resource"))
            if r is Resource.ELECTRICITY:
                units.append(default_battery(**params))
            elif r is Resource.WATER:
                units.append(default_tank(**params))
            else:
                # raises the no-gas-storage error
                units.append(StorageUnit(resource=r, **params))
        except TypeError as exc:
            raise ConfigError(f"storage[{i}]: {exc}") from None
        except (HolimeterError, ValueError) as exc:
            raise ConfigError(f"storage[{i}]: {exc}") from None
    return tuple(units)


def _input(raw, base_dir: Path):
    if not isinstance(raw, dict):
        raise ConfigError("input: expected an object")
    if "synthetic" in raw:
        syn = raw["synthetic"] or {}
        over = syn.get("spec", {}) or {}
        if not isinstance(over, dict):
            raise ConfigError("input.synthetic.spec: expected an object")
        d = default_spec().to_dict()
        unknown = set(over) - set(d)
        if unknown:
            raise ConfigError(f"input.synthetic.spec: unknown keys {sorted(unknown)}")
        d.update(over)
        try:
            spec = SyntheticSpec.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"input.synthetic.spec: {exc}") from None
        return SyntheticInput(spec)
    if "csv" in raw:
        if "mapping" not in raw:
            raise ConfigError("input: csv input needs a 'mapping' file")
        window = raw.get("window")
        if window is not None:
            if not (isinstance(window, list) and len(window) == 2
                    and all(isinstance(x, int) for x in window)):
                raise ConfigError("input.window: expected [start_slot, n_slots]")
            window = (window[0], window[1])
        return CsvInput(base_dir / raw["csv"], base_dir / raw["mapping"], window)
    raise ConfigError("input: expected 'synthetic' or 'csv'")


def resolve_seed(config_seed: int, flag: int | None = None,
                 env: Mapping[str, str] | None = None) -> int:
    """Seed precedence: command-line flag, then $HOLIMETER_SEED, then config."""
    if flag is not None:
        return int(flag)
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV)
    if raw not in (None, ""):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
    return int(config_seed)


def parse_config(d: Mapping, base_dir: Path | str = ".", seed: int | None = None,
                 env: Mapping[str, str] | None = None) -> RunConfig:
    if not isinstance(d, Mapping):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base_dir = Path(base_dir)
    if "input" not in d:
        raise ConfigError("config needs an 'input' section")
    inp = _input(d["input"], base_dir)

    cases = d.get("cases", ["case0", "case1", "case2"])
    if not isinstance(cases, list) or not cases:
        raise ConfigError("cases: expected a non-empty list")
    bad = [c for c in cases if c not in CASES]
    if bad:
        raise ConfigError(f"cases: unknown {bad}; choose from {list(CASES)}")
    cases = tuple(dict.fromkeys(cases))

    storage = _storage(d.get("storage"))
    mi_bins = _num(d, "mi_bins", 16, int)
    if mi_bins < 2:
        raise ConfigError("mi_bins: must be >= 2")

    att = d.get("attacker", {}) or {}
    theta = dict(DEFAULT_THETA)
    raw_theta = att.get("theta", {})
    if isinstance(raw_theta, (int, float)) and not isinstance(raw_theta, bool):
        theta = {r: float(raw_theta) for r in theta}
    elif isinstance(raw_theta, dict):
        for k, v in raw_theta.items():
            theta[Resource.parse(k)] = float(v)
    else:
        raise ConfigError("attacker.theta: expected a number or a per-resource map")
    if not all(math.isfinite(v) and v > 0 for v in theta.values()):
        raise ConfigError("attacker.theta: must be > 0")
    match_tol = _num(att, "match_tol", 0.2)
    if not 0 < match_tol < 1:
        raise ConfigError("attacker.match_tol: must lie in (0, 1)")

    weights = {}
    for k, v in (d.get("weights") or {}).items():
        try:
            r = Resource.parse(k)
        except ValueError:
            raise ConfigError(f"weights: unknown resource {k!r}") from None
        weights[r] = _num({"w": v}, "w", 1.0)

    sv = d.get("solver", {}) or {}
    unknown = set(sv) - {"tolerance", "exhaustive_limit", "restarts", "max_sweeps",
                         "max_iterations"}
    if unknown:
        raise ConfigError(f"solver: unknown keys {sorted(unknown)}")
    max_it = sv.get("max_iterations")
    seed_v = resolve_seed(_num(d, "seed", 0, int, positive=False), seed, env)
    solver = SolverSettings(
        tolerance=_num(sv, "tolerance", 1e-7),
        exhaustive_limit=_num(sv, "exhaustive_limit", 10_000, int),
        restarts=_num(sv, "restarts", 5, int),
        max_sweeps=_num(sv, "max_sweeps", 20, int),
        seed=seed_v,
        max_iterations=None if max_it is None else _num(sv, "max_iterations", 0, int),
    )

    noise = d.get("noise")
    if noise is not None:
        if not isinstance(noise, dict) or set(noise) - {"distribution", "scale"}:
            raise ConfigError("noise: expected {distribution, scale}")
        try:
            NoiseSpec(distribution=noise.get("distribution", "laplace"),
                      scale=noise.get("scale", 1.0))
        except ValueError as exc:
            raise ConfigError(f"noise: {exc}") from None

    tariff = d.get("tariff", 1.0)
    vals = tariff if isinstance(tariff, list) else [tariff]
    if not vals or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           and math.isfinite(v) and v >= 0 for v in vals):
        raise ConfigError("tariff: expected a non-negative number or list of numbers")

    energy_weight = _num(d, "energy_weight", 1.0, positive=False)
    if energy_weight < 0:
        raise ConfigError("energy_weight: must be >= 0")

    out = d.get("output")
    return RunConfig(
        input=inp, cases=cases, storage=storage, mi_bins=mi_bins, theta=theta,
        match_tol=match_tol, weights=weights,
        shift_in_case1=bool(d.get("shift_in_case1", True)),
        cyclic_storage=bool(d.get("cyclic_storage", True)),
        solver=solver, downsample_k=_num(d, "downsample_k", 15, int), noise=noise,
        tariff=tariff, output=None if out is None else base_dir / out, seed=seed_v,
        energy_weight=energy_weight,
    )


def load_config(path, seed: int | None = None, env: Mapping[str, str] | None = None
                ) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw, path.parent, seed, env)


__all__ = ["CASES", "SEED_ENV", "DEFAULT_THETA", "SyntheticInput", "CsvInput", "RunConfig",
           "parse_config", "load_config", "resolve_seed"]
