"""Joint appliance start search around the inner dispatch LP.

The inner problem separates by resource: each storage unit serves one
resource and the objective is a sum of per-resource terms. A resource with
storage is re-solved on a persistent, warm-started HiGHS model whenever
its demand changes; a resource without storage has a fixed meter, so its
term is just its weighted total variation.

Small search spaces are enumerated. Larger ones use seeded coordinate
descent with restarts; candidates whose exact storage-free part already
rules them out are skipped without touching the LP.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..household.model import RESOURCES, Household
from ..timeseries import Resource, TimeSeries, total_variation
from .dispatch import (Dispatch, _Builder, build_dispatch_lp, build_resource_block,
                       decode, ordered_resources, resource_scales, throughput_cost)
from .lp import _to_highs, check_status, new_highs, solve_lexicographic

log = logging.getLogger(__name__)

# Metered values are snapped to this many decimals to drop solver round-off.
_SNAP_DECIMALS = 10


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = 1e-7
    exhaustive_limit: int = 10_000
    restarts: int = 5
    max_sweeps: int = 20
    seed: int = 0
    max_iterations: int | None = None


@dataclass(frozen=True)
class ShapingProblem:
    household: Household
    objective_resources: tuple[Resource, ...]
    weights: Mapping[Resource, float] = field(default_factory=dict)
    allow_shifting: bool = True
    cyclic_storage: bool = True
    settings: SolverSettings = SolverSettings()
    energy_weight: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.energy_weight) and self.energy_weight >= 0):
            raise ValueError("energy_weight must be finite and >= 0")
        res = ordered_resources(self.objective_resources)
        if not res:
            raise ValueError("objective_resources must not be empty")
        object.__setattr__(self, "objective_resources", res)
        w = {Resource.parse(k): float(v) for k, v in dict(self.weights).items()}
        for r in res:
            w.setdefault(r, 1.0)
        for r, v in w.items():
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"weight for {r.value} must be finite and > 0")
        object.__setattr__(self, "weights", {r: w[r] for r in res})


@dataclass(frozen=True)
class SolverStats:
    mode: str
    evaluations: int
    lp_solves: int
    iterations: int
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_time: bool = False) -> dict:
        d = {"mode": self.mode, "evaluations": self.evaluations,
             "lp_solves": self.lp_solves, "iterations": self.iterations}
        if include_time:
            d["wall_time"] = self.wall_time
        return d


@dataclass(frozen=True)
class ShapingSolution:
    metered: dict[Resource, TimeSeries]
    dispatch: dict[str, Dispatch]
    starts: dict[str, int]
    objective_value: float
    solver_stats: SolverStats


# -- inner evaluation ----------------------------------------------------------

class _StorageTerm:
    """Warm-started single-resource dispatch LP; only the demand changes."""

    def __init__(self, h: Household, resource: Resource, weight: float, scale: float,
                 cyclic: bool, settings: SolverSettings, energy_weight: float = 0.0):
        b = _Builder()
        units = [u for u in h.storage if u.resource is resource]
        build_resource_block(b, resource, np.zeros(h.horizon_slots), units, weight, scale,
                             h.slot_seconds, cyclic, energy_weight)
        lp = b.build()
        self.rows = np.arange(lp.row_blocks[("balance", resource)].start,
                              lp.row_blocks[("balance", resource)].stop, dtype=np.int32)
        self.highs = new_highs(settings.tolerance, settings.max_iterations)
        self.highs.setOptionValue("solver", "simplex")
        self.highs.passModel(_to_highs(lp))
        self.solves = 0
        self.iterations = 0

    def __call__(self, demand: np.ndarray) -> float:
        h = self.highs
        h.changeRowsBounds(self.rows.size, self.rows, demand, demand)
        h.run()
        try:
            check_status(h)
        except Exception:
            # retry from scratch before giving up
            h.clearSolver()
            h.run()
            check_status(h)
        info = h.getInfo()
        self.solves += 1
        self.iterations += int(info.simplex_iteration_count)
        return float(info.objective_function_value)


class _Evaluator:
    def __init__(self, problem: ShapingProblem, scales: Mapping[Resource, float]):
        h = problem.household
        self.h = h
        self.apps = h.appliances
        self.terms = {}
        self.flat = {}
        for r in problem.objective_resources:
            coef = problem.weights[r] / scales[r]
            if h.storage_for(r) is not None:
                self.terms[r] = _StorageTerm(h, r, problem.weights[r], scales[r],
                                             problem.cyclic_storage, problem.settings,
                                             problem.energy_weight)
            else:
                self.flat[r] = coef
        self.touch = {r: [i for i, a in enumerate(self.apps) if r in a.profiles]
                      for r in problem.objective_resources}
        self.base = {r: np.array(h.base_load[r].values) for r in problem.objective_resources}
        self.cache: dict = {}
        self.evaluations = 0

    def _demand(self, r: Resource, x) -> np.ndarray:
        out = self.base[r].copy()
        for i in self.touch[r]:
            prof = self.apps[i].profiles[r]
            out[x[i]:x[i] + prof.size] += prof
        return out

    def _part(self, r: Resource, x, lower: bool = False) -> float:
        key = (r, tuple(x[i] for i in self.touch[r]))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if r in self.flat:
            val = self.flat[r] * total_variation(self._demand(r, x))
        elif lower:
            return 0.0
        else:
            val = self.terms[r](self._demand(r, x))
        self.cache[key] = val
        return val

    def value(self, x) -> float:
        self.evaluations += 1
        return sum(self._part(r, x) for r in self.touch)

    def lower_bound(self, x) -> float:
        return sum(self._part(r, x, lower=True) for r in self.touch)

    @property
    def lp_solves(self) -> int:
        return sum(t.solves for t in self.terms.values())

    @property
    def iterations(self) -> int:
        return sum(t.iterations for t in self.terms.values())


def _tie(v: float, tol: float) -> float:
    return tol * (1.0 + abs(v))


def _exhaustive(ev: _Evaluator, x0: list[int], movable: list[int], tol: float):
    windows = [ev.apps[i].window for i in movable]
    best_x, best_v = None, math.inf
    x = list(x0)
    for combo in itertools.product(*windows):
        for i, s in zip(movable, combo):
            x[i] = s
        v = ev.value(x)
        if best_x is None or v < best_v - _tie(best_v, tol):
            best_x, best_v = list(x), v
    return best_x, best_v


def _descend(ev: _Evaluator, x: list[int], movable: list[int], settings: SolverSettings):
    tol = settings.tolerance
    cur = ev.value(x)
    for _ in range(settings.max_sweeps):
        changed = False
        for i in movable:
            old, old_v = x[i], cur
            best_s, best_v = None, math.inf
            for c in ev.apps[i].window:
                x[i] = c
                if best_s is not None and ev.lower_bound(x) >= best_v - _tie(best_v, tol):
                    continue
                v = ev.value(x)
                if best_s is None or v < best_v - _tie(best_v, tol):
                    best_s, best_v = c, v
            improves = best_v < old_v - _tie(old_v, tol)
            tie_left = best_s < old and best_v <= old_v + _tie(old_v, tol)
            if best_s != old and (improves or tie_left):
                x[i], cur = best_s, best_v
                changed = True
            else:
                x[i] = old
        if not changed:
            break
    return x, cur


def _local_search(ev: _Evaluator, x0: list[int], movable: list[int],
                  settings: SolverSettings):
    rng = np.random.default_rng(settings.seed)
    best_x, best_v = None, math.inf
    for k in range(max(1, settings.restarts)):
        if k == 0:
            x = list(x0)
        else:
            x = list(x0)
            for i in movable:
                w = ev.apps[i].window
                x[i] = int(rng.integers(w.start, w.stop))
        x, v = _descend(ev, x, movable, settings)
        tie = _tie(best_v, settings.tolerance) if best_x is not None else 0.0
        if best_x is None or v < best_v - tie or (v <= best_v + tie and x < best_x):
            best_x, best_v = list(x), v
        log.debug("restart %d: objective %.6g", k, v)
    return best_x, best_v


def search_schedules(problem: ShapingProblem) -> ShapingSolution:
    """Find start times and storage dispatch minimising the weighted TV."""
    t0 = time.perf_counter()
    h = problem.household
    settings = problem.settings
    orig = h.original_starts
    scales = resource_scales(h, orig, problem.objective_resources)
    names = [a.name for a in h.appliances]
    x0 = [orig[n] for n in names]
    movable = [i for i, a in enumerate(h.appliances)
               if problem.allow_shifting and len(a.window) > 1]

    evaluations = lp_solves = iterations = 0
    if not movable:
        mode, best_x = "fixed", x0
        evaluations = 1
    else:
        ev = _Evaluator(problem, scales)
        orig_v = ev.value(x0)
        space = math.prod(len(h.appliances[i].window) for i in movable)
        if space <= settings.exhaustive_limit:
            mode = "exhaustive"
            ev.evaluations = 0
            best_x, best_v = _exhaustive(ev, x0, movable, settings.tolerance)
        else:
            mode = "local"
            best_x, best_v = _local_search(ev, x0, movable, settings)
        if best_v > orig_v + _tie(orig_v, settings.tolerance):
            best_x = x0
        evaluations, lp_solves, iterations = ev.evaluations, ev.lp_solves, ev.iterations

    starts = dict(zip(names, (int(s) for s in best_x)))
    lp = build_dispatch_lp(h, starts, problem.objective_resources, problem.weights,
                           problem.cyclic_storage, scales, problem.energy_weight)
    # among flattest dispatches, take the one cycling storage least
    res = solve_lexicographic(lp, throughput_cost(lp), settings.tolerance,
                              settings.max_iterations)
    meter_arrays, dispatch = decode(lp, res.x, h)
    metered = {}
    for r in RESOURCES:
        if r in meter_arrays:
            vals = np.round(np.clip(meter_arrays[r], 0.0, None), _SNAP_DECIMALS) + 0.0
        else:
            vals = h.demand(r, starts)
        metered[r] = h.series(r, vals)
    dispatch = {k: Dispatch(d.charge + 0.0, d.discharge + 0.0, d.level + 0.0)
                for k, d in dispatch.items()}
    stats = SolverStats(mode=mode, evaluations=evaluations, lp_solves=lp_solves + 1,
                        iterations=iterations + res.iterations,
                        wall_time=time.perf_counter() - t0)
    log.info("search %s: %d evaluations, %d LP solves, objective %.6g, %.2fs", mode,
             evaluations, stats.lp_solves, res.objective, stats.wall_time)
    return ShapingSolution(metered=metered, dispatch=dispatch, starts=starts,
                           objective_value=float(res.objective), solver_stats=stats)
