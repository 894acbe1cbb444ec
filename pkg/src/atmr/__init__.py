"""Constrained multiobjective evolutionary optimization with ATM-R."""

from .algorithms import RunResult, run_atmr, run_nsga2_cdp
from .core import (
    AlgorithmConfig,
    ProblemDefinition,
    Solution,
    constraint_violation,
    evaluate,
    evaluate_batch,
    transformed_objectives,
)
from .metrics import MetricReport, hypervolume, hv_monte_carlo, igd
from .operators import Phase, classify_phase
from .problems import get_problem, list_problems, reference_front

__all__ = [
    "AlgorithmConfig",
    "MetricReport",
    "Phase",
    "ProblemDefinition",
    "RunResult",
    "Solution",
    "classify_phase",
    "constraint_violation",
    "evaluate",
    "evaluate_batch",
    "get_problem",
    "hv_monte_carlo",
    "hypervolume",
    "igd",
    "list_problems",
    "reference_front",
    "run_atmr",
    "run_nsga2_cdp",
    "transformed_objectives",
]
