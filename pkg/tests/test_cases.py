from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from holimeter.errors import MissingStorage
from holimeter.household import Appliance, Household, generate_synthetic_day, synthesize_metered
from holimeter.shaper import (CaseSettings, Dispatch, ShapingProblem,
                              case_problem, run_case, search_schedules, verify_solution)
from holimeter.storage import StorageUnit, default_battery, default_tank
from holimeter.timeseries import Resource, TimeSeries, total_variation

E, W, G = Resource.ELECTRICITY, Resource.WATER, Resource.GAS


@pytest.fixture(scope="module")
def short_day():
    """Four hours of the default household with its storage."""
    h = generate_synthetic_day(0)
    T = 240
    apps = tuple(a for a in h.appliances if a.latest_start + a.duration <= T)
    base = {r: TimeSeries(r, s.values[:T]) for r, s in h.base_load.items()}
    return Household(apps, base, (default_battery(), default_tank()), T)


class TestCaseDefinitions:
    def test_case0_is_the_raw_sum(self, household):
        sol = run_case("case0", household)
        raw = synthesize_metered(household)
        for r in raw:
            assert np.array_equal(sol.metered[r].values, raw[r].values)
        assert sol.dispatch == {} and sol.starts == household.original_starts
        assert verify_solution(case_problem("case0", household), sol) == []

    def test_case1_without_shifting_leaves_water_and_gas(self, short_day):
        settings = CaseSettings(shift_in_case1=False)
        sol = run_case("case1", short_day, settings)
        base = run_case("case0", short_day)
        for r in (W, G):
            assert np.array_equal(sol.metered[r].values, base.metered[r].values)
        assert sol.starts == short_day.original_starts
        assert verify_solution(case_problem("case1", short_day, settings), sol) == []

    def test_problem_shapes(self, short_day):
        assert case_problem("case1", short_day).objective_resources == (E,)
        p2 = case_problem("case2", short_day)
        assert p2.objective_resources == (E, W, G) and p2.allow_shifting
        assert p2.weights == {E: 1.0, W: 1.0, G: 1.0}
        assert case_problem("case0", short_day).household.storage == ()

    def test_missing_storage(self, short_day):
        with pytest.raises(MissingStorage):
            case_problem("case1", replace(short_day, storage=()))
        with pytest.raises(MissingStorage):
            case_problem("case2", replace(short_day, storage=(default_battery(),)))
        # a tank alone is not enough for Case 1 either
        with pytest.raises(MissingStorage):
            case_problem("case1", replace(short_day, storage=(default_tank(),)))

    def test_short_day_cases_are_feasible(self, short_day):
        for case in ("case1", "case2"):
            sol = run_case(case, short_day)
            assert verify_solution(case_problem(case, short_day), sol) == []
            # the water tank is lossless and cyclic
            if case == "case2":
                T = short_day.horizon_slots
                assert abs(sol.metered[W].values.sum()
                           - short_day.demand(W, sol.starts).sum()) <= 1e-6 * T

    def test_case2_does_not_roughen_gas(self, household, cases):
        tv = {c: total_variation(cases[c].metered[G]) for c in ("case0", "case2")}
        assert tv["case2"] <= tv["case0"]

    def test_default_cases_are_feasible(self, cases):
        for c in ("case0", "case1", "case2"):
            assert verify_solution(cases.problem(c), cases[c]) == []


def four_slot_problem():
    unit = StorageUnit(E, 5.0, 2.0, 2.0, 1.0, 1.0, 1.0)
    base = {E: TimeSeries(E, [1.0, 3.0, 0.5, 2.0], 3600)}
    h = Household((), base, (unit,), 4, 3600)
    return ShapingProblem(h, (E,), cyclic_storage=False)


class TestVerify:
    def test_search_output_is_clean(self):
        p = four_slot_problem()
        assert verify_solution(p, search_schedules(p)) == []

    def test_level_perturbation_is_reported_once(self):
        p = four_slot_problem()
        sol = search_schedules(p)
        d = sol.dispatch["battery"]
        level = d.level.copy()
        assert level[3] + 1 <= 5.0
        level[3] += 1.0
        bad = replace(sol, dispatch={"battery": Dispatch(d.charge, d.discharge, level)})
        (v,) = verify_solution(p, bad)
        assert (v.kind, v.slot) == ("level_recursion", 3)
        assert v.amount == pytest.approx(1.0)

    def test_meter_and_bounds_are_checked(self):
        p = four_slot_problem()
        sol = search_schedules(p)
        m = sol.metered[E].values.copy()
        m[0] += 0.5
        bad = replace(sol, metered={**sol.metered, E: TimeSeries(E, m, 3600)})
        kinds = {(v.kind, v.slot) for v in verify_solution(p, bad)}
        assert kinds == {("meter_balance", 0)}
        d = sol.dispatch["battery"]
        ch = d.charge.copy()
        ch[1] = 9.0
        bad = replace(sol, dispatch={"battery": Dispatch(ch, d.discharge, d.level)})
        kinds = {v.kind for v in verify_solution(p, bad)}
        assert "charge_bounds" in kinds and "level_recursion" in kinds

    def test_cyclic_and_window(self):
        unit = StorageUnit(E, 5.0, 2.0, 2.0, 1.0, 1.0, 1.0)
        a = Appliance("x", {E: [1.0]}, 1, 0, 2, shiftable=True)
        h = Household((a,), {E: TimeSeries(E, [1.0, 3.0, 0.5, 2.0], 3600)}, (unit,), 4, 3600)
        p = ShapingProblem(h, (E,))
        sol = search_schedules(p)
        assert verify_solution(p, sol) == []
        moved = replace(sol, starts={"x": 3})
        assert [v.kind for v in verify_solution(p, moved)] == ["window"]
        idle = np.zeros(4)
        drained = replace(sol, dispatch={"battery": Dispatch(idle, idle,
                                                             np.array([1.0, 1.0, 1.0, 0.0]))})
        kinds = {v.kind for v in verify_solution(p, drained)}
        assert "cyclic" in kinds

    def test_case0_is_trivially_feasible(self, short_day):
        sol = run_case("case0", short_day)
        assert verify_solution(case_problem("case0", short_day), sol) == []

