from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holimeter.baselines import (NoiseSpec, coarse_runs, downsample_baseline,
                                 mean_abs_perturbation, noise_draws, obfuscate)
from holimeter.errors import LengthNotDivisible
from holimeter.household import synthesize_metered
from holimeter.privacy import (Signature, edge_attack, mi_report, score_attack,
                               signatures_for)
from holimeter.timeseries import Resource, TimeSeries, total_variation

E, W, G = Resource.ELECTRICITY, Resource.WATER, Resource.GAS


def streams(rng, T=48):
    return {r: TimeSeries(r, rng.uniform(0, 2, T)) for r in (E, W, G)}


class TestDownsample:
    def test_identity(self):
        m = streams(np.random.default_rng(0))
        out = downsample_baseline(m, 1)
        assert all(out[r] == m[r] for r in m)

    def test_volume_conserved(self):
        m = streams(np.random.default_rng(1))
        out = downsample_baseline(m, 6)
        for r in m:
            assert out[r].integral() == pytest.approx(m[r].integral(), rel=1e-12)
            assert len(out[r]) == 8 and out[r].slot_seconds == 360

    def test_k_must_divide(self):
        with pytest.raises(LengthNotDivisible):
            downsample_baseline(streams(np.random.default_rng(2)), 5)

    def test_short_pulse_disappears(self):
        # a 2-slot pulse of height 1 inside a 4-slot window averages to 0.5
        fine = np.zeros(16)
        fine[5:7] = 1.0
        sig = [Signature("P", 1.0)]
        runs = {"P": [(5, 7)]}
        assert score_attack(edge_attack(fine, sig, 0.6), runs).recall == 1.0
        coarse = downsample_baseline({E: TimeSeries(E, fine)}, 4)[E]
        assert np.max(np.abs(np.diff(coarse.values))) == pytest.approx(0.5)
        events = edge_attack(coarse, sig, 0.6)
        assert events == []
        assert score_attack(events, {"P": coarse_runs(runs["P"], 4)}).recall == 0.0

    def test_coarse_runs_cover_the_fine_run(self):
        assert coarse_runs([(5, 7), (8, 12), (0, 1)], 4) == [(1, 2), (2, 3), (0, 1)]

    @settings(max_examples=50)
    @given(st.integers(1, 6), st.integers(1, 12), st.data())
    def test_tv_never_grows(self, k, n, data):
        v = data.draw(st.lists(st.floats(0, 10, allow_nan=False), min_size=k * n,
                               max_size=k * n))
        m = {E: TimeSeries(E, v)}
        assert total_variation(downsample_baseline(m, k)[E]) <= total_variation(m[E]) + 1e-9


class TestObfuscate:
    def test_deterministic_per_seed(self):
        m = streams(np.random.default_rng(3))
        spec = NoiseSpec("laplace", 0.3, seed=9)
        a, b = obfuscate(m, spec), obfuscate(m, spec)
        assert all(a[r].values.tobytes() == b[r].values.tobytes() for r in m)
        c = obfuscate(m, NoiseSpec("laplace", 0.3, seed=10))
        assert not np.array_equal(a[E].values, c[E].values)

    def test_resources_draw_independent_streams(self):
        spec = NoiseSpec("gaussian", 1.0, seed=0)
        assert not np.array_equal(noise_draws(spec, E, 10), noise_draws(spec, W, 10))

    @pytest.mark.parametrize("dist", ["laplace", "gaussian"])
    def test_clamping_bound_and_non_negativity(self, dist):
        rng = np.random.default_rng(4)
        m = streams(rng, T=500)
        spec = NoiseSpec(dist, 1.5, seed=2)
        out = obfuscate(m, spec)
        for r in m:
            noise = noise_draws(spec, r, 500)
            assert np.all(out[r].values >= 0)
            assert out[r].values.sum() >= m[r].values.sum() + noise.sum() - 1e-9

    def test_tiny_scale_is_almost_identity(self):
        m = streams(np.random.default_rng(5))
        out = obfuscate(m, NoiseSpec("laplace", 1e-12))
        for r in m:
            assert np.allclose(out[r].values, m[r].values, atol=1e-9, rtol=0)
        assert max(mean_abs_perturbation(m, out).values()) < 1e-9

    def test_per_resource_scale(self):
        m = streams(np.random.default_rng(6))
        out = obfuscate(m, NoiseSpec("laplace", {"water": 0.5}))
        assert out[E] == m[E] and out[G] == m[G]
        assert out[W] != m[W]

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec("uniform", 1.0)
        with pytest.raises(ValueError):
            NoiseSpec("laplace", 0.0)
        with pytest.raises(ValueError):
            NoiseSpec("laplace", {"electricity": -1.0})
        spec = NoiseSpec("Gaussian", {"gas": 0.2}, seed=4)
        assert NoiseSpec.from_dict(spec.to_dict()) == spec

    def test_hides_the_washing_machine(self, household):
        h = household
        raw = synthesize_metered(h)
        scale = {r: 0.5 * max(s.magnitude for s in signatures_for(h, r)) for r in (E, W)}
        noisy = obfuscate(raw, NoiseSpec("laplace", scale, seed=0))
        before = mi_report(h, h.original_starts, raw)
        after = mi_report(h, h.original_starts, noisy)
        for r in (E, W):
            assert after.get("WM", r) < before.get("WM", r)
