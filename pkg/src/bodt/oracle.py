"""Exhaustive reference solver for small instances."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._accel import NUMBA_ENABLED
from .heuristics import find_plan
from .model import (
    BodtError,
    Plan,
    PlanMetrics,
    Scenario,
    TICKS_PER_SECOND,
    check_beta,
    normalized_score,
    plan_metrics,
    to_seconds,
)

DEFAULT_CAP = 10**7
OBJECTIVES = {"score": kernels.OBJ_SCORE, "makespan": kernels.OBJ_MAKESPAN, "blocks": kernels.OBJ_BLOCKS}
_CHUNK = 1 << 15


class OracleCapExceeded(BodtError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"instance has {size} assignments, above the enumeration cap of {cap}")


def enumeration_cap() -> int:
    """Cap from ``BODT_ORACLE_CAP`` if set, else 10**7."""
    raw = os.environ.get("BODT_ORACLE_CAP")
    return int(raw) if raw else DEFAULT_CAP


@dataclass(frozen=True)
class OracleResult:
    best_plan: Plan
    best_metrics: PlanMetrics
    best_score: float
    best_makespan: float
    best_blocks: int
    enumerated: int
    objective: str
    beta: float
    max_exec: float
    max_blocks: int

    def score_of(self, metrics: PlanMetrics) -> float:
        """Score of any plan under this oracle's normalisation (maxima over all assignments)."""
        return normalized_score(metrics.overall_exec, metrics.total_blocks, self.max_exec,
                                self.max_blocks, self.beta)


def _digit_chunks(n_tasks: int, n_sites: int):
    total = n_sites ** n_tasks
    powers = n_sites ** np.arange(n_tasks - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % n_sites


def _chunk_loads(exec_ticks: np.ndarray, digits: np.ndarray) -> np.ndarray:
    n_tasks, n_sites = exec_ticks.shape
    chosen = exec_ticks[np.arange(n_tasks)[None, :], digits]
    loads = np.zeros((digits.shape[0], n_sites), dtype=np.int64)
    for s in range(n_sites):
        loads[:, s] = np.where(digits == s, chosen, 0).sum(axis=1)
    return loads


def _chunk_blocks(loads: np.ndarray, dt: int, block: int) -> np.ndarray:
    return np.where(loads > 0, -(-(loads + dt) // block), 0).sum(axis=1)


def _numpy_maxima(exec_ticks, dt, block):
    max_peak = max_total = count = 0
    for digits in _digit_chunks(*exec_ticks.shape):
        loads = _chunk_loads(exec_ticks, digits)
        max_peak = max(max_peak, int(loads.max()))
        max_total = max(max_total, int(_chunk_blocks(loads, dt, block).max()))
        count += digits.shape[0]
    return max_peak, max_total, count


def _numpy_best(exec_ticks, dt, block, objective, beta, max_exec, max_blocks):
    best_value, best_vector, count = np.inf, None, 0
    for digits in _digit_chunks(*exec_ticks.shape):
        loads = _chunk_loads(exec_ticks, digits)
        peak = loads.max(axis=1)
        total = _chunk_blocks(loads, dt, block)
        if objective == kernels.OBJ_MAKESPAN:
            values = peak.astype(np.float64)
        elif objective == kernels.OBJ_BLOCKS:
            values = total.astype(np.float64)
        else:
            exec_term = (peak / kernels.TICKS) / max_exec if max_exec > 0 else np.zeros(len(peak))
            block_term = total / max_blocks if max_blocks > 0 else np.zeros(len(peak))
            values = beta * exec_term + (1.0 - beta) * block_term
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value, best_vector = float(values[i]), digits[i].copy()
        count += digits.shape[0]
    return best_vector, count


def exact_optimum(scenario: Scenario, beta: float = 0.5, objective: str = "score", *,
                  cap: int | None = None, prune: bool = True,
                  backend: str | None = None) -> OracleResult:
    """Global optimum over all |sites|^|tasks| assignments.

    Score normalisation uses the largest makespan and block count over the
    whole assignment space (first pass), then a second pass minimises.
    Ties resolve to the lexicographically smallest assignment vector.
    ``backend`` is ``"kernel"`` (depth-first, optional pruning) or ``"numpy"``
    (vectorised, never prunes); the default follows the numba switch.
    """
    beta = check_beta(beta)
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {sorted(OBJECTIVES)}, got {objective!r}")
    arr = scenario.arrays
    cap = enumeration_cap() if cap is None else cap
    size = arr.n_sites ** arr.n_tasks
    if size > cap:
        raise OracleCapExceeded(size, cap)
    backend = backend or ("kernel" if NUMBA_ENABLED else "numpy")
    exec_ticks, dt, block = arr.exec_ticks, arr.deploy_ticks, arr.block_ticks
    obj = OBJECTIVES[objective]

    if backend == "kernel":
        max_peak, max_blocks, _ = kernels.enumerate_maxima(exec_ticks, dt, block)
        max_exec = max_peak / TICKS_PER_SECOND
        vector = np.zeros(arr.n_tasks, dtype=np.int64)
        _, count = kernels.enumerate_best(exec_ticks, dt, block, obj, beta, max_exec,
                                          max_blocks, prune, vector)
    elif backend == "numpy":
        max_peak, max_blocks, _ = _numpy_maxima(exec_ticks, dt, block)
        max_exec = max_peak / TICKS_PER_SECOND
        vector, count = _numpy_best(exec_ticks, dt, block, obj, beta, max_exec, max_blocks)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    plan = Plan.from_vector(scenario, vector)
    metrics = plan_metrics(plan, scenario)
    return OracleResult(
        best_plan=plan,
        best_metrics=metrics,
        best_score=normalized_score(metrics.overall_exec, metrics.total_blocks, max_exec,
                                    int(max_blocks), beta),
        best_makespan=metrics.overall_exec,
        best_blocks=metrics.total_blocks,
        enumerated=int(count),
        objective=objective,
        beta=beta,
        max_exec=to_seconds(max_peak),
        max_blocks=int(max_blocks),
    )


@dataclass(frozen=True)
class GapReport:
    heuristic_plan: Plan
    heuristic_metrics: PlanMetrics
    heuristic_score: float
    oracle: OracleResult

    @property
    def gap(self) -> float:
        return self.heuristic_score - self.oracle.best_score


def compare_with_oracle(scenario: Scenario, beta: float, *, cap: int | None = None,
                        prune: bool = True) -> GapReport:
    """Heuristic choice and exact optimum, both scored under the oracle's normalisation."""
    oracle = exact_optimum(scenario, beta, "score", cap=cap, prune=prune)
    plan, candidates = find_plan(scenario, beta)
    metrics = plan_metrics(plan, scenario)
    return GapReport(plan, metrics, oracle.score_of(metrics), oracle)


def optimality_gap(scenario: Scenario, beta: float, *, cap: int | None = None) -> float:
    """Heuristic score minus optimal score; never negative."""
    return compare_with_oracle(scenario, beta, cap=cap).gap
