"""Turn a :class:`RunConfig` into per-case reports and plot-ready series."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .baselines import (coarse_runs, downsample_baseline, mean_abs_perturbation,
                        obfuscate)
from .config import RunConfig
from .household.model import RESOURCES, Household, synthesize_metered
from .privacy import (AttackScore, MIEntry, MIReport, attack_resource, discomfort,
                      edge_attack, energy_cost, mi_report, mutual_information,
                      score_attack, signatures_for)
from .report import CaseReport
from .shaper import case_problem, run_case, verify_solution
from .timeseries import Resource, TimeSeries, resample_average, total_variation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeriesTable:
    """One resource's metered stream plus each appliance label's own use."""

    resource: Resource
    epochs: np.ndarray
    metered: np.ndarray
    appliances: dict[str, np.ndarray]


@dataclass(frozen=True)
class CaseResult:
    report: CaseReport
    series: tuple[SeriesTable, ...]


def _tables(h: Household, starts, metered: dict[Resource, TimeSeries], k: int = 1
            ) -> tuple[SeriesTable, ...]:
    out = []
    for r in RESOURCES:
        apps = {}
        for label in h.labels:
            if r in h.label_resources(label):
                s = h.label_series(label, r, starts)
                apps[label] = np.asarray((resample_average(s, k) if k > 1 else s).values)
        m = metered[r]
        out.append(SeriesTable(r, m.epochs, np.asarray(m.values), apps))
    return tuple(out)


def _attack_all(h, starts, metered, cfg: RunConfig) -> dict[Resource, AttackScore]:
    return {r: attack_resource(h, starts, metered[r], cfg.theta[r], cfg.match_tol)
            for r in RESOURCES}


def _report(case, h, cfg, starts, metered, attack, mi, stats, details,
            billed: TimeSeries | None = None) -> CaseReport:
    billed = metered[Resource.ELECTRICITY] if billed is None else billed
    return CaseReport(
        case=case, mi=mi, attack=attack,
        tv={r: total_variation(metered[r]) for r in RESOURCES},
        discomfort_minutes=discomfort(starts, h.original_starts, h.slot_seconds),
        cost=energy_cost(billed, cfg.tariff),
        solver_stats=stats, household=h.fingerprint(), details=details,
    )


def run_shaping_case(case: str, h: Household, cfg: RunConfig) -> CaseResult:
    settings = cfg.case_settings()
    sol = run_case(case, h, settings)
    details = {"objective_value": sol.objective_value,
               "starts": {k: sol.starts[k] for k in sorted(sol.starts)}}
    if case != "case0":
        details["violations"] = len(verify_solution(case_problem(case, h, settings), sol))
    report = _report(case, h, cfg, sol.starts, sol.metered,
                     _attack_all(h, sol.starts, sol.metered, cfg),
                     mi_report(h, sol.starts, sol.metered, cfg.mi_bins),
                     sol.solver_stats.to_dict(), details)
    return CaseResult(report, _tables(h, sol.starts, sol.metered))


def run_downsample(h: Household, cfg: RunConfig) -> CaseResult:
    """Case 0 streams reported as k-slot averages."""
    k = cfg.downsample_k
    starts = h.original_starts
    raw = synthesize_metered(h)
    coarse = downsample_baseline(raw, k)
    entries, attack = [], {}
    for label in h.labels:
        for r in h.label_resources(label):
            own = resample_average(h.label_series(label, r, starts), k)
            entries.append(MIEntry(label, r, mutual_information(own, coarse[r], cfg.mi_bins),
                                   cfg.mi_bins))
    for r in RESOURCES:
        sigs = signatures_for(h, r)
        events = edge_attack(coarse[r], sigs, cfg.theta[r], cfg.match_tol)
        truth = {s.appliance: coarse_runs(h.ground_truth_runs(s.appliance, starts, r), k)
                 for s in sigs if s.magnitude > cfg.theta[r]}
        attack[r] = score_attack(events, truth, horizon=len(coarse[r]))
    report = _report("downsample", h, cfg, starts, coarse, attack, MIReport(tuple(entries)),
                     {"mode": "none"}, {"downsample_k": k},
                     billed=raw[Resource.ELECTRICITY])
    return CaseResult(report, _tables(h, starts, coarse, k))


def run_obfuscate(h: Household, cfg: RunConfig) -> CaseResult:
    """Case 0 streams with additive noise (default scale: half the largest
    appliance step of each resource)."""
    starts = h.original_starts
    raw = synthesize_metered(h)
    default_scale = {}
    for r in RESOURCES:
        mags = [s.magnitude for s in signatures_for(h, r)]
        if mags:
            default_scale[r] = 0.5 * max(mags)
    spec = cfg.noise_spec(default_scale)
    noisy = obfuscate(raw, spec)
    pert = mean_abs_perturbation(raw, noisy)
    details = {"noise": spec.to_dict(),
               "mean_abs_perturbation": {r.value: v for r, v in pert.items()}}
    report = _report("obfuscate", h, cfg, starts, noisy, _attack_all(h, starts, noisy, cfg),
                     mi_report(h, starts, noisy, cfg.mi_bins), {"mode": "none"}, details)
    return CaseResult(report, _tables(h, starts, noisy))


def run_config(cfg: RunConfig, h: Household | None = None) -> list[CaseResult]:
    h = cfg.build_household() if h is None else h
    results = []
    for case in cfg.cases:
        log.info("running %s", case)
        if case == "downsample":
            results.append(run_downsample(h, cfg))
        elif case == "obfuscate":
            results.append(run_obfuscate(h, cfg))
        else:
            results.append(run_shaping_case(case, h, cfg))
    return results


__all__ = ["SeriesTable", "CaseResult", "run_shaping_case", "run_downsample",
           "run_obfuscate", "run_config"]
