from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holimeter.errors import KeyMismatch, LengthMismatch
from holimeter.privacy import (AttackScore, EventKind, MIReport, NialmEvent, Signature,
                               attack_resource, discomfort, edge_attack, energy_cost, entropy,
                               mi_report, mutual_information, score_attack, signatures_for,
                               true_edges)
from holimeter.timeseries import Resource, TimeSeries, quantize

from oracles import direct_mi

E, W, G = Resource.ELECTRICITY, Resource.WATER, Resource.GAS


class TestMutualInformation:
    def test_identical_uniform_levels(self):
        x = np.tile([0.0, 1.0, 2.0, 3.0], 25)
        assert abs(mutual_information(x, x, bins=4) - 2.0) <= 1e-9

    def test_constant_partner(self):
        x = np.random.default_rng(0).uniform(0, 5, 200)
        assert mutual_information(x, np.full(200, 3.0)) == 0.0
        assert mutual_information(np.full(200, 3.0), x) == 0.0

    def test_six_sample_hand_histogram(self):
        x = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0]
        y = [0.0, 1.0, 1.0, 1.0, 0.0, 0.0]
        # joint cells (0,0) (0,1) (1,1)x2 (2,0)x2
        want = (1 / 6 * math.log2((1 / 6) / (1 / 3 * 1 / 2)) * 2
                + 2 / 6 * math.log2((2 / 6) / (1 / 3 * 1 / 2)) * 2)
        assert mutual_information(x, y, bins=3) == pytest.approx(want, abs=1e-12)

    def test_matches_direct_double_sum(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(16, 300))
            x = rng.gamma(2.0, 1.0, n)
            y = 0.5 * x + rng.normal(0, 1, n).clip(-x / 2, None)
            bins = int(rng.integers(2, 17))
            want = direct_mi(quantize(x, bins), quantize(y, bins))
            assert mutual_information(x, y, bins) == pytest.approx(want, abs=1e-9)

    def test_checks(self):
        with pytest.raises(LengthMismatch):
            mutual_information(np.zeros(20), np.zeros(21))
        with pytest.raises(ValueError):
            mutual_information(np.arange(8.0), np.arange(8.0), bins=16)

    @settings(max_examples=60)
    @given(st.integers(2, 16), st.data())
    def test_bounds_and_symmetry(self, bins, data):
        n = data.draw(st.integers(bins, 80))
        vals = st.floats(0, 100, allow_nan=False)
        x = np.array(data.draw(st.lists(vals, min_size=n, max_size=n)))
        y = np.array(data.draw(st.lists(vals, min_size=n, max_size=n)))
        mi = mutual_information(x, y, bins)
        assert mi == pytest.approx(mutual_information(y, x, bins), abs=1e-12)
        assert 0.0 <= mi <= min(entropy(x, bins), entropy(y, bins)) + 1e-12
        assert mi <= math.log2(bins) + 1e-12

    @settings(max_examples=60)
    @given(st.lists(st.floats(0, 100, allow_nan=False), min_size=16, max_size=80))
    def test_self_information_is_entropy(self, x):
        assert mutual_information(x, x) == entropy(x)

    def test_shuffle_destroys_dependence(self, household):
        starts = household.original_starts
        x = household.label_series("HVAC", E, starts).values
        y = household.demand(E, starts)
        shuffled = np.random.default_rng(0).permutation(y)
        mi = mutual_information(x, y)
        assert mutual_information(x, shuffled) < 0.1 * mi + 0.05


class TestMIReport:
    def test_default_household_pairs(self, household):
        rep = mi_report(household, household.original_starts,
                        {r: household.series(r, household.demand(r, household.original_starts))
                         for r in (E, W, G)})
        pairs = {(e.appliance, e.resource) for e in rep.entries}
        assert pairs == {("HVAC", E), ("HVAC", G), ("WM", E), ("WM", W)}
        assert all(0 <= e.mi_bits <= 4 for e in rep.entries)
        assert MIReport.from_dict(rep.to_dict()) == rep
        with pytest.raises(KeyError):
            rep.get("HVAC", W)


class TestEdgeAttack:
    sigs = [Signature("A", 1.0)]

    def test_on_off_example(self):
        ev = edge_attack([0, 0, 1, 1, 0], self.sigs, 0.5)
        assert [(e.slot, e.kind, e.magnitude, e.matched_appliance) for e in ev] == [
            (2, EventKind.ON, 1.0, "A"), (4, EventKind.OFF, 1.0, "A")]

    def test_constant_has_no_events(self):
        assert edge_attack(np.full(10, 2.0), self.sigs, 0.1) == []

    def test_matching_rules(self):
        sigs = [Signature("A", 1.0), Signature("B", 1.5), Signature("C", 1.25)]
        # steps +1.1, +1.4, -2.5, +5.0: closest within 20 % or nothing
        ev = edge_attack([0, 1.1, 1.1, 2.5, 0.0, 0.0, 5.0], sigs, 0.5)
        assert [e.matched_appliance for e in ev] == ["A", "B", None, None]
        # equal distance to 1.0 and 1.5: first listed signature wins
        tie = edge_attack([0, 1.25], [Signature("A", 1.0), Signature("B", 1.5)], 0.5,
                          match_tol=0.3)
        assert tie[0].matched_appliance == "A"

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            edge_attack([0, 1], self.sigs, 0.0)
        with pytest.raises(ValueError):
            edge_attack([0, 1], self.sigs, 0.5, match_tol=1.0)
        with pytest.raises(ValueError):
            NialmEvent(1, EventKind.ON, 0.0)


class TestScoring:
    runs = {"A": [(2, 4), (6, 8)]}

    def test_perfect(self):
        ev = edge_attack([0, 0, 1, 1, 0, 0, 1, 1, 0, 0], [Signature("A", 1.0)], 0.5)
        s = score_attack(ev, self.runs)
        assert (s.recall, s.precision) == (1.0, 1.0)
        assert s["A"].true_edges == 4 and s["A"].matched == 4

    def test_no_events(self):
        s = score_attack([], self.runs)
        assert s.recall == 0.0 and s.precision == 1.0

    def test_one_slot_late_off(self):
        ev = [NialmEvent(2, EventKind.ON, 1.0, "A"), NialmEvent(5, EventKind.OFF, 1.0, "A")]
        s = score_attack(ev, {"A": [(2, 4)]})
        assert s.recall == 1.0
        late = [NialmEvent(2, EventKind.ON, 1.0, "A"), NialmEvent(6, EventKind.OFF, 1.0, "A")]
        assert score_attack(late, {"A": [(2, 4)]}).recall == 0.5

    def test_events_are_used_once_and_kinds_must_agree(self):
        ev = [NialmEvent(3, EventKind.ON, 1.0, "A")]
        s = score_attack(ev, {"A": [(2, 3), (4, 6)]})
        assert s["A"].matched == 1
        wrong = [NialmEvent(2, EventKind.OFF, 1.0, "A")]
        assert score_attack(wrong, {"A": [(2, 4)]}).recall == 0.0

    def test_unmatched_events_cost_precision(self):
        ev = [NialmEvent(2, EventKind.ON, 1.0, "A"), NialmEvent(4, EventKind.OFF, 1.0, "A"),
              NialmEvent(7, EventKind.ON, 3.0, None)]
        s = score_attack(ev, {"A": [(2, 4)]})
        assert s.recall == 1.0 and s.precision == pytest.approx(2 / 3)
        assert s.matched <= min(2 * s.true_edges, s.detected)
        assert AttackScore.from_dict(s.to_dict()) == s

    def test_edges_at_the_boundary_are_not_counted(self):
        assert true_edges([(0, 3), (5, 10)], horizon=10) == [(3, EventKind.OFF),
                                                              (5, EventKind.ON)]

    def test_clean_household_is_fully_recalled(self, household):
        h = household
        starts = h.original_starts
        score = attack_resource(h, starts, h.series(E, h.demand(E, starts)), theta=0.25)
        assert score.recall == 1.0
        assert {s.appliance for s in signatures_for(h, E)} == {"HVAC", "WM"}


class TestConsumerMetrics:
    def test_discomfort(self):
        assert discomfort({"a": 3, "b": 4}, {"a": 3, "b": 4}) == 0
        assert discomfort({"a": 40}, {"a": 10}) == 30
        assert discomfort({"a": 2}, {"a": 0}, slot_seconds=900) == 30
        with pytest.raises(KeyMismatch):
            discomfort({"a": 1}, {"b": 1})

    def test_flat_and_time_of_use_cost(self):
        m = TimeSeries(E, [1.0, 2.0, 0.5, 4.0], 900)
        assert energy_cost(m, 0.2) == pytest.approx(7.5 * 0.25 * 0.2)
        tou = [0.1, 0.3, 0.3, 0.1]
        want = sum(v * 0.25 * p for v, p in zip([1.0, 2.0, 0.5, 4.0], tou))
        assert energy_cost(m, tou) == pytest.approx(want, rel=1e-12)
        with pytest.raises(LengthMismatch):
            energy_cost(m, [0.1, 0.2])

    def test_cost_follows_storage_losses(self, cases, household):
        raw = energy_cost(cases["case0"].metered[E], 1.0)
        # Case 1 uses the lossy default battery, so it can only cost more
        assert energy_cost(cases["case1"].metered[E], 1.0) >= raw - 1e-9
