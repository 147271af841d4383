"""Storage-dispatch LP with a total-variation (flattening) objective.

Per objective resource ``r`` and slot ``t``::

    meter_r[t] = demand_r[t] + charge_r[t] - discharge_r[t]
    level[t]   = level[t-1] + eta_c * charge[t] * dv - discharge[t] * dv / eta_d
    e_r[t]    >= |meter_r[t] - meter_r[t-1]|            (t >= 1)

    minimise  sum_r (w_r / scale_r) * (sum_t e_r[t] + lam * sum_t m_r[t] * dh)

``lam`` (``energy_weight``, default 0) prices metered volume on resources
that have storage, in hours of peak demand (``dh`` = slot length in
hours). Without it the LP may hold a meter flat by burning stored energy
through simultaneous charge and discharge; with lossless storage the term
is a constant. ``dv`` turns one slot at unit rate into stored quantity (hours for kW,
minutes for L/min). Storage terms exist only where a unit of that resource
is installed; resources outside the objective get no variables at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from ..household.model import RESOURCES, Household
from ..timeseries import Resource
from .lp import EQ, LE, LinearProgram


@dataclass(frozen=True, eq=False)
class Dispatch:
    """Per-slot charge / discharge rates and end-of-slot level of one unit."""

    charge: np.ndarray
    discharge: np.ndarray
    level: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Dispatch):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("charge", "discharge", "level"))

    __hash__ = None


def ordered_resources(resources: Iterable) -> tuple[Resource, ...]:
    res = {Resource.parse(r) for r in resources}
    return tuple(r for r in RESOURCES if r in res)


def resource_scales(h: Household, starts: Mapping[str, int],
                    resources: Iterable[Resource]) -> dict[Resource, float]:
    """Peak raw demand per resource (1.0 when the resource is unused)."""
    out = {}
    for r in resources:
        peak = float(h.demand(r, starts).max())
        out[r] = peak if peak > 0 else 1.0
    return out


class _Builder:
    def __init__(self):
        self.n = 0
        self.m = 0
        self.rows, self.cols, self.vals = [], [], []
        self.senses, self.rhs = [], []
        self.lb, self.ub, self.c = [], [], []
        self.columns, self.row_blocks = {}, {}

    def add_vars(self, key, n, lb, ub, cost=0.0):
        sl = slice(self.n, self.n + n)
        self.columns[key] = sl
        self.lb.append(np.broadcast_to(np.asarray(lb, float), (n,)))
        self.ub.append(np.broadcast_to(np.asarray(ub, float), (n,)))
        self.c.append(np.broadcast_to(np.asarray(cost, float), (n,)))
        self.n += n
        return np.arange(sl.start, sl.stop)

    def add_rows(self, key, n, sense, rhs):
        sl = slice(self.m, self.m + n)
        self.row_blocks[key] = sl
        self.senses.append(np.full(n, sense, dtype=object))
        self.rhs.append(np.broadcast_to(np.asarray(rhs, float), (n,)))
        self.m += n
        return np.arange(sl.start, sl.stop)

    def coef(self, rows, cols, vals):
        rows, cols = np.asarray(rows), np.asarray(cols)
        self.rows.append(rows)
        self.cols.append(cols)
        self.vals.append(np.broadcast_to(np.asarray(vals, float), rows.shape))

    def build(self) -> LinearProgram:
        cat = lambda xs, dt=float: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)
        return LinearProgram(c=cat(self.c), rows=cat(self.rows, np.int64),
                             cols=cat(self.cols, np.int64), vals=cat(self.vals),
                             senses=cat(self.senses, object), rhs=cat(self.rhs),
                             lb=cat(self.lb), ub=cat(self.ub),
                             columns=self.columns, row_blocks=self.row_blocks)


def build_resource_block(b: _Builder, resource: Resource, demand: np.ndarray,
                         units, weight: float, scale: float, slot_seconds: int,
                         cyclic: bool, energy_weight: float = 0.0) -> None:
    T = demand.size
    dv = resource.volume_per_slot(slot_seconds)
    units = list(units)
    price = weight / scale * energy_weight * slot_seconds / 3600.0 if units else 0.0
    meter = b.add_vars(("meter", resource), T, 0.0, np.inf, price)
    bal = b.add_rows(("balance", resource), T, EQ, demand)
    b.coef(bal, meter, 1.0)
    for u in units:
        ch = b.add_vars(("charge", u.name), T, 0.0, u.max_charge_rate)
        dis = b.add_vars(("discharge", u.name), T, 0.0, u.max_discharge_rate)
        lev = b.add_vars(("level", u.name), T, 0.0, u.capacity)
        b.coef(bal, ch, -1.0)
        b.coef(bal, dis, 1.0)
        rhs = np.zeros(T)
        rhs[0] = u.initial_level
        rec = b.add_rows(("level", u.name), T, EQ, rhs)
        b.coef(rec, lev, 1.0)
        b.coef(rec[1:], lev[:-1], -1.0)
        b.coef(rec, ch, -u.charge_efficiency * dv)
        b.coef(rec, dis, dv / u.discharge_efficiency)
        if cyclic:
            cyc = b.add_rows(("cyclic", u.name), 1, EQ, u.initial_level)
            b.coef(cyc, lev[-1:], 1.0)
    if T > 1:
        epi = b.add_vars(("epigraph", resource), T - 1, 0.0, np.inf, weight / scale)
        up = b.add_rows(("epigraph_up", resource), T - 1, LE, 0.0)
        dn = b.add_rows(("epigraph_down", resource), T - 1, LE, 0.0)
        # +(m_t - m_{t-1}) - e <= 0  and  -(m_t - m_{t-1}) - e <= 0
        b.coef(up, meter[1:], 1.0)
        b.coef(up, meter[:-1], -1.0)
        b.coef(up, epi, -1.0)
        b.coef(dn, meter[1:], -1.0)
        b.coef(dn, meter[:-1], 1.0)
        b.coef(dn, epi, -1.0)


def build_dispatch_lp(h: Household, starts: Mapping[str, int] | None,
                      objective_resources: Iterable, weights: Mapping | None = None,
                      cyclic: bool = True,
                      scales: Mapping[Resource, float] | None = None,
                      energy_weight: float = 0.0) -> LinearProgram:
    """Dispatch LP for a fixed start assignment.

    ``scales`` defaults to the peak demand of each objective resource under
    ``starts``; the schedule search pins them to the unshifted peaks so that
    objectives of different assignments are comparable.
    """
    starts = h.check_starts(starts)
    if not (np.isfinite(energy_weight) and energy_weight >= 0):
        raise ValueError("energy_weight must be finite and >= 0")
    resources = ordered_resources(objective_resources)
    if not resources:
        raise ValueError("objective_resources must not be empty")
    weights = {Resource.parse(k): float(v) for k, v in (weights or {}).items()}
    if scales is None:
        scales = resource_scales(h, starts, resources)
    b = _Builder()
    for r in resources:
        w = weights.get(r, 1.0)
        if not (np.isfinite(w) and w > 0):
            raise ValueError(f"weight for {r.value} must be finite and > 0")
        units = [u for u in h.storage if u.resource is r]
        build_resource_block(b, r, h.demand(r, starts), units, w, float(scales[r]),
                             h.slot_seconds, cyclic, energy_weight)
    return b.build()


def throughput_cost(lp: LinearProgram) -> np.ndarray:
    """Unit cost on every charge and discharge variable (zero elsewhere)."""
    cost = np.zeros(lp.num_vars)
    for key, sl in lp.columns.items():
        if key[0] in ("charge", "discharge"):
            cost[sl] = 1.0
    return cost


def decode(lp: LinearProgram, x: np.ndarray, h: Household
           ) -> tuple[dict[Resource, np.ndarray], dict[str, Dispatch]]:
    """Split an LP solution into metered arrays and per-unit dispatch."""
    metered, dispatch = {}, {}
    for key, sl in lp.columns.items():
        if key[0] == "meter":
            metered[key[1]] = x[sl]
    for u in h.storage:
        if ("level", u.name) in lp.columns:
            dispatch[u.name] = Dispatch(charge=x[lp.columns[("charge", u.name)]],
                                        discharge=x[lp.columns[("discharge", u.name)]],
                                        level=x[lp.columns[("level", u.name)]])
    return metered, dispatch
