"""The three household scenarios.

* Case 0: nothing is shaped; meters read the plain sum of all loads.
* Case 1: only electricity is flattened (battery plus, optionally, shifting).
* Case 2: electricity, water and gas are flattened together, using the
  battery, the water tank and joint appliance shifting. Gas has no store,
  so only shifting can reshape it.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

from ..errors import MissingStorage
from ..household.model import RESOURCES, Household, synthesize_metered
from ..timeseries import Resource, total_variation
from .search import (ShapingProblem, ShapingSolution, SolverSettings, SolverStats,
                     search_schedules)


class Case(str, enum.Enum):
    CASE0 = "case0"
    CASE1 = "case1"
    CASE2 = "case2"


@dataclass(frozen=True)
class CaseSettings:
    shift_in_case1: bool = True
    weights: dict = field(default_factory=dict)
    cyclic_storage: bool = True
    solver: SolverSettings = SolverSettings()
    # prices metered energy so the battery is not drained of losses to stay flat
    energy_weight: float = 1.0


def case_problem(case: Case | str, h: Household,
                 settings: CaseSettings | None = None) -> ShapingProblem:
    """The optimisation instance behind a case (Case 0 has no storage)."""
    case = Case(case)
    settings = settings or CaseSettings()
    weights = {Resource.parse(k): v for k, v in settings.weights.items()}
    if case is Case.CASE0:
        return ShapingProblem(household=replace(h, storage=()), objective_resources=RESOURCES,
                              weights={r: weights.get(r, 1.0) for r in RESOURCES},
                              allow_shifting=False, cyclic_storage=settings.cyclic_storage,
                              settings=settings.solver)
    if h.storage_for(Resource.ELECTRICITY) is None:
        raise MissingStorage(f"{case.value} needs a battery")
    if case is Case.CASE1:
        return ShapingProblem(household=h, objective_resources=(Resource.ELECTRICITY,),
                              weights={Resource.ELECTRICITY: weights.get(Resource.ELECTRICITY, 1.0)},
                              allow_shifting=settings.shift_in_case1,
                              cyclic_storage=settings.cyclic_storage, settings=settings.solver,
                              energy_weight=settings.energy_weight)
    if h.storage_for(Resource.WATER) is None:
        raise MissingStorage(f"{case.value} needs a water tank")
    return ShapingProblem(household=h, objective_resources=RESOURCES,
                          weights={r: weights.get(r, 1.0) for r in RESOURCES},
                          allow_shifting=True, cyclic_storage=settings.cyclic_storage,
                          settings=settings.solver, energy_weight=settings.energy_weight)


def run_case(case: Case | str, h: Household,
             settings: CaseSettings | None = None) -> ShapingSolution:
    case = Case(case)
    problem = case_problem(case, h, settings)
    if case is not Case.CASE0:
        return search_schedules(problem)
    t0 = time.perf_counter()
    metered = synthesize_metered(h)
    hh = problem.household
    objective = 0.0
    for r in RESOURCES:
        peak = float(metered[r].values.max())
        objective += problem.weights[r] * total_variation(metered[r]) / (peak if peak > 0 else 1.0)
    return ShapingSolution(metered=metered, dispatch={}, starts=hh.original_starts,
                           objective_value=objective,
                           solver_stats=SolverStats("none", 0, 0, 0, time.perf_counter() - t0))
