"""Plan construction: nearest plan, block reduction, balancing and plan selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .model import (
    Plan,
    PlanMetrics,
    Scenario,
    best_index,
    check_beta,
    metrics_from_loads,
    plan_metrics,
    score_plans,
    site_loads,
)


class MoveLedger:
    """(task, from-site, to-site) moves already made in one algorithm run."""

    def __init__(self, n_tasks: int, n_sites: int):
        self.moves = np.zeros((n_tasks, n_sites, n_sites), dtype=np.bool_)

    @classmethod
    def for_scenario(cls, scenario: Scenario) -> MoveLedger:
        return cls(scenario.arrays.n_tasks, scenario.arrays.n_sites)

    def record(self, task: int, src: int, dst: int) -> None:
        if self.moves[task, src, dst]:
            raise ValueError(f"move {(task, src, dst)} already recorded")
        self.moves[task, src, dst] = True

    def __contains__(self, move) -> bool:
        task, src, dst = move
        return bool(self.moves[task, src, dst])

    def __len__(self) -> int:
        return int(np.count_nonzero(self.moves))

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        for t, s, d in zip(*np.nonzero(self.moves)):
            yield int(t), int(s), int(d)


class CandidateSet:
    """Distinct plans, in the order they were generated, with their metrics."""

    def __init__(self):
        self._items: list[tuple[Plan, PlanMetrics]] = []
        self._keys: set = set()

    def add(self, plan: Plan, metrics: PlanMetrics) -> bool:
        key = plan.key()
        if key in self._keys:
            return False
        self._keys.add(key)
        self._items.append((plan, metrics))
        return True

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __getitem__(self, i: int) -> tuple[Plan, PlanMetrics]:
        return self._items[i]

    @property
    def plans(self) -> list[Plan]:
        return [p for p, _ in self._items]

    @property
    def metrics(self) -> list[PlanMetrics]:
        return [m for _, m in self._items]

    def names(self) -> list[str]:
        """``plan_<k>`` by active-site count; repeats get a letter suffix (plan_3b)."""
        seen: dict[str, int] = {}
        out = []
        for plan, _ in self._items:
            base = plan.name
            n = seen.get(base, 0)
            seen[base] = n + 1
            out.append(base if n == 0 else f"{base}{chr(ord('a') + n)}")
        return out

    def scores(self, beta: float) -> list[float]:
        return score_plans(self._items, beta)

    def best(self, beta: float) -> int:
        return best_index(self._items, beta)

    def fewest_sites(self) -> int:
        """Index of the candidate using the fewest sites (then fewest blocks)."""
        return min(range(len(self)), key=lambda i: (self.metrics[i].active_sites,
                                                     self.metrics[i].total_blocks, i))


def receiver_order(scenario: Scenario) -> np.ndarray:
    """Per task, site indices from nearest to farthest (stable on ties)."""
    return np.argsort(scenario.arrays.task_rate, axis=1, kind="stable").astype(np.int64)


def longest_first(scenario: Scenario) -> np.ndarray:
    """Per site, all task indices by descending execution time there (stable on ties)."""
    return np.argsort(-scenario.arrays.exec_ticks.T, axis=1, kind="stable").astype(np.int64)


def _vector(scenario: Scenario, plan: Plan) -> np.ndarray:
    return plan.to_vector(scenario).copy()


def nearest_plan(scenario: Scenario) -> Plan:
    """Every task on the site with the lowest transfer rate from its data location."""
    vector = np.argmin(scenario.arrays.task_rate, axis=1)
    return Plan.from_vector(scenario, vector)


def reduce_time_blocks(scenario: Scenario, plan: Plan, min_tb: int,
                       ledger: MoveLedger | None = None) -> Plan:
    """Pack tasks into already-paid blocks until ``min_tb`` blocks or no legal move.

    Donors are tried by descending unused time in their last block, their
    tasks longest first, receivers nearest first. A move is legal only when the
    receiver's block count does not change and the same move has not been made
    before in this run.
    """
    if min_tb < 1:
        raise ValueError(f"min_tb must be >= 1, got {min_tb}")
    arr = scenario.arrays
    vector = _vector(scenario, plan)
    if ledger is None:
        ledger = MoveLedger.for_scenario(scenario)
    kernels.reduce_blocks(arr.exec_ticks, receiver_order(scenario), longest_first(scenario), vector,
                          arr.deploy_ticks, arr.block_ticks, int(min_tb), ledger.moves)
    return Plan.from_vector(scenario, vector)


def balance(scenario: Scenario, plan: Plan, *, fill_idle: bool = False,
            block_cap: int | None = None, ledger: MoveLedger | None = None) -> Plan:
    """Even out running times by moving work off the slowest site.

    By default only sites already running tasks receive work, which keeps the
    site count chosen by block reduction. ``block_cap`` bounds the total block
    count a move may produce (used for budget planning).
    """
    arr = scenario.arrays
    vector = _vector(scenario, plan)
    if ledger is None:
        ledger = MoveLedger.for_scenario(scenario)
    cap = -1 if block_cap is None else int(block_cap)
    kernels.balance(arr.exec_ticks, receiver_order(scenario), longest_first(scenario), vector,
                    arr.deploy_ticks,
                    arr.block_ticks, bool(fill_idle), cap, ledger.moves)
    return Plan.from_vector(scenario, vector)


def candidate_plans(scenario: Scenario) -> CandidateSet:
    """Reduce-then-balance the nearest plan for every block target up to its own count."""
    start = nearest_plan(scenario)
    upper = plan_metrics(start, scenario).total_blocks
    candidates = CandidateSet()
    # a bag with no work needs no blocks; still produce one candidate
    for min_tb in range(1, max(upper, 1) + 1):
        plan = balance(scenario, reduce_time_blocks(scenario, start, min_tb))
        candidates.add(plan, plan_metrics(plan, scenario))
    return candidates


def find_plan(scenario: Scenario, beta: float) -> tuple[Plan, CandidateSet]:
    """Lowest-score candidate for the given performance weight, plus all candidates."""
    beta = check_beta(beta)
    candidates = candidate_plans(scenario)
    return candidates[candidates.best(beta)][0], candidates


@dataclass(frozen=True)
class BudgetPlan:
    plan: Plan
    metrics: PlanMetrics
    max_blocks: int
    feasible: bool


def find_plan_budget(scenario: Scenario, max_blocks: int) -> BudgetPlan:
    """Single reduce/balance pass targeting ``max_blocks``.

    ``feasible`` is False when the best-effort plan still needs more blocks.
    """
    if max_blocks < 1:
        raise ValueError(f"max_blocks must be >= 1, got {max_blocks}")
    reduced = reduce_time_blocks(scenario, nearest_plan(scenario), max_blocks)
    plan = balance(scenario, reduced, block_cap=max_blocks)
    metrics = plan_metrics(plan, scenario)
    return BudgetPlan(plan, metrics, int(max_blocks), metrics.total_blocks <= max_blocks)


def centralised_plan(scenario: Scenario) -> Plan:
    """All tasks on the one site with the lowest total execution time."""
    totals = scenario.arrays.exec_ticks.sum(axis=0)
    return Plan.single_site(scenario, scenario.arrays.site_ids[int(np.argmin(totals))])


def vector_metrics(scenario: Scenario, vector: np.ndarray) -> PlanMetrics:
    return metrics_from_loads(scenario, site_loads(scenario, np.asarray(vector, dtype=np.int64)))
