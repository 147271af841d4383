"""Holistic load shaping: dispatch LP, start-time search and case runner."""

from .cases import Case, CaseSettings, case_problem, run_case
from .dispatch import Dispatch, build_dispatch_lp, decode, resource_scales
from .lp import LinearProgram, LPResult, solve_lexicographic, solve_lp
from .search import (ShapingProblem, ShapingSolution, SolverSettings, SolverStats,
                     search_schedules)
from .verify import Violation, verify_solution

__all__ = [
    "Case", "CaseSettings", "case_problem", "run_case",
    "Dispatch", "build_dispatch_lp", "decode", "resource_scales",
    "LinearProgram", "LPResult", "solve_lp", "solve_lexicographic",
    "ShapingProblem", "ShapingSolution", "SolverSettings", "SolverStats", "search_schedules",
    "Violation", "verify_solution",
]
