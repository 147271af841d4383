"""Multi-resource (electricity, water, gas) smart-meter privacy toolkit."""

from .baselines import NoiseSpec, downsample_baseline, obfuscate
from .household import Appliance, Household, generate_synthetic_day, load_ampds2_csv
from .privacy import (AttackScore, MIReport, NialmEvent, discomfort, edge_attack,
                      energy_cost, mutual_information, score_attack)
from .report import CaseReport
from .shaper import (Case, CaseSettings, ShapingProblem, ShapingSolution, SolverSettings,
                     run_case, search_schedules, verify_solution)
from .storage import StorageUnit, default_battery, default_tank
from .timeseries import Resource, TimeSeries, quantize, resample_average, total_variation

__version__ = "0.1.0"

__all__ = [
    "NoiseSpec", "downsample_baseline", "obfuscate",
    "Appliance", "Household", "generate_synthetic_day", "load_ampds2_csv",
    "AttackScore", "MIReport", "NialmEvent", "discomfort", "edge_attack", "energy_cost",
    "mutual_information", "score_attack", "CaseReport",
    "Case", "CaseSettings", "ShapingProblem", "ShapingSolution", "SolverSettings",
    "run_case", "search_schedules", "verify_solution",
    "StorageUnit", "default_battery", "default_tank",
    "Resource", "TimeSeries", "quantize", "resample_average", "total_variation",
]
