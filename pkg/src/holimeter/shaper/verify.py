"""Independent feasibility re-check of a shaping solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..household.model import RESOURCES
from .search import ShapingProblem, ShapingSolution


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    slot: int | None
    amount: float

    def __str__(self):
        at = "" if self.slot is None else f" at slot {self.slot}"
        return f"{self.kind} [{self.where}]{at}: off by {self.amount:.3g}"


def verify_solution(problem: ShapingProblem, solution: ShapingSolution,
                    atol: float = 1e-6) -> list[Violation]:
    """Return every violated constraint; an empty list means feasible."""
    h = problem.household
    T = h.horizon_slots
    out: list[Violation] = []

    def flag(kind, where, slots, amounts):
        for t, a in zip(np.atleast_1d(slots), np.atleast_1d(amounts)):
            out.append(Violation(kind, where, None if t is None else int(t), float(a)))

    starts = solution.starts
    names = {a.name for a in h.appliances}
    if set(starts) != names:
        flag("starts", "appliances", [None], [len(set(starts) ^ names)])
        return out
    for a in h.appliances:
        s = starts[a.name]
        allowed = a.window if problem.allow_shifting else range(a.original_start,
                                                                a.original_start + 1)
        if s not in allowed:
            flag("window", a.name, [s], [min(abs(s - allowed.start), abs(s - allowed[-1]))])
    if out:
        return out

    for r in RESOURCES:
        m = solution.metered.get(r)
        if m is None or len(m) != T:
            flag("meter_missing", r.value, [None], [np.nan])
            continue
        m = np.asarray(m.values)
        bad = np.flatnonzero(m < -atol)
        flag("non_negativity", r.value, bad, -m[bad])
        demand = h.demand(r, starts)
        net = np.zeros(T)
        if r in problem.objective_resources:
            for u in h.storage:
                if u.resource is not r:
                    continue
                d = solution.dispatch.get(u.name)
                if d is None:
                    flag("dispatch_missing", u.name, [None], [np.nan])
                    continue
                ch, dis, lev = (np.asarray(v, dtype=float) for v in (d.charge, d.discharge, d.level))
                net += ch - dis
                for kind, arr, hi in (("charge_bounds", ch, u.max_charge_rate),
                                      ("discharge_bounds", dis, u.max_discharge_rate),
                                      ("level_bounds", lev, u.capacity)):
                    over = np.maximum(arr - hi, 0.0)
                    under = np.maximum(-arr, 0.0)
                    viol = np.maximum(over, under)
                    bad = np.flatnonzero(viol > atol)
                    flag(kind, u.name, bad, viol[bad])
                dv = r.volume_per_slot(h.slot_seconds)
                prev = np.concatenate([[u.initial_level], lev[:-1]])
                expect = prev + u.charge_efficiency * ch * dv - dis * dv / u.discharge_efficiency
                gap = np.abs(lev - expect)
                bad = np.flatnonzero(gap > atol)
                flag("level_recursion", u.name, bad, gap[bad])
                if problem.cyclic_storage:
                    gap = abs(lev[-1] - u.initial_level)
                    if gap > atol:
                        flag("cyclic", u.name, [T - 1], [gap])
        gap = np.abs(m - (demand + net))
        bad = np.flatnonzero(gap > atol)
        flag("meter_balance", r.value, bad, gap[bad])
    return out
