"""Cost/performance planning for bags of distributed tasks on block-billed cloud sites."""

from .heuristics import (
    BudgetPlan,
    CandidateSet,
    MoveLedger,
    balance,
    candidate_plans,
    centralised_plan,
    find_plan,
    find_plan_budget,
    nearest_plan,
    reduce_time_blocks,
)
from .model import (
    BodtError,
    CostModel,
    DataLocation,
    InvalidPlanError,
    MissingRateError,
    Plan,
    PlanMetrics,
    Scenario,
    ScenarioError,
    Site,
    Task,
    plan_metrics,
    score_plans,
    validate_plan,
)
from .oracle import OracleCapExceeded, OracleResult, exact_optimum, optimality_gap
from .sim import NoiseSpec, SimTrace, evaluate_plans, prediction_table, simulate
from .workload import GeneratorSpec, generate_scenario, load_scenario, save_scenario

__all__ = [
    "BodtError", "BudgetPlan", "CandidateSet", "CostModel", "DataLocation", "GeneratorSpec",
    "InvalidPlanError", "MissingRateError", "MoveLedger", "NoiseSpec", "OracleCapExceeded",
    "OracleResult", "Plan", "PlanMetrics", "Scenario", "ScenarioError", "SimTrace", "Site", "Task",
    "balance", "candidate_plans", "centralised_plan", "evaluate_plans", "exact_optimum", "find_plan",
    "find_plan_budget", "generate_scenario", "load_scenario", "nearest_plan", "optimality_gap",
    "plan_metrics", "prediction_table", "reduce_time_blocks", "save_scenario", "score_plans",
    "simulate", "validate_plan",
]
