"""Domain types and the closed-form cost/performance model.

Times are handled internally as integer microsecond ticks so that block
counting (a ceiling) is exact at boundaries; public functions take and return
seconds as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

TICKS_PER_SECOND = 1_000_000
DEFAULT_BLOCK_SECONDS = 3600.0


class BodtError(Exception):
    """Base class for every error raised by this package."""


class ScenarioError(BodtError, ValueError):
    """A scenario violates one of its invariants."""


class MissingRateError(ScenarioError, KeyError):
    """No transfer rate for a (location, site) pair."""

    def __init__(self, location: str, site: str):
        self.location = location
        self.site = site
        super().__init__(f"missing transfer rate for (location={location!r}, site={site!r})")

    def __str__(self) -> str:
        return self.args[0]


class InvalidPlanError(BodtError, ValueError):
    """A plan does not cover every task exactly once."""


def to_ticks(seconds: float) -> int:
    return int(round(seconds * TICKS_PER_SECOND))


def to_seconds(ticks: int) -> float:
    return int(ticks) / TICKS_PER_SECOND


def _check_finite_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ScenarioError(f"{name} must be finite and >= 0, got {value!r}")
    return value


def check_beta(beta: float) -> float:
    """Validate a performance-vs-cost weight; 1 favours speed, 0 favours cost."""
    beta = float(beta)
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta must lie in [0, 1], got {beta!r}")
    return beta


@dataclass(frozen=True)
class DataLocation:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Site:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Task:
    id: str
    location: str
    size: float

    def __post_init__(self):
        size = float(self.size)
        if not math.isfinite(size) or size <= 0:
            raise ScenarioError(f"task {self.id!r}: size must be finite and > 0, got {self.size!r}")
        object.__setattr__(self, "size", size)


@dataclass(frozen=True)
class CostModel:
    """Per-unit transfer rates, shared compute rate, deployment and billing.

    ``transfer[location_id][site_id]`` is seconds per data unit.
    """

    transfer: Mapping[str, Mapping[str, float]]
    compute_rate: float
    deploy_time: float = 0.0
    block_seconds: float = DEFAULT_BLOCK_SECONDS
    unit_cost: float = 1.0

    def __post_init__(self):
        table = {}
        for loc, row in self.transfer.items():
            table[str(loc)] = {
                str(site): _check_finite_nonneg(f"transfer[{loc!r}][{site!r}]", rate)
                for site, rate in row.items()
            }
        object.__setattr__(self, "transfer", table)
        for name in ("compute_rate", "deploy_time", "unit_cost"):
            object.__setattr__(self, name, _check_finite_nonneg(name, getattr(self, name)))
        block = float(self.block_seconds)
        if not math.isfinite(block) or to_ticks(block) < 1:
            raise ScenarioError(f"block_seconds must be finite and >= 1 microsecond, got {block!r}")
        object.__setattr__(self, "block_seconds", block)

    def rate(self, location: str, site: str) -> float:
        try:
            return self.transfer[location][site]
        except KeyError:
            raise MissingRateError(location, site) from None

    @property
    def deploy_ticks(self) -> int:
        return to_ticks(self.deploy_time)

    @property
    def block_ticks(self) -> int:
        return to_ticks(self.block_seconds)


class ScenarioArrays:
    """Dense, index-aligned views of a scenario used by the numeric kernels.

    Rows follow ``Scenario.tasks`` order, columns follow ``Scenario.sites``.
    """

    def __init__(self, scenario: Scenario):
        self.site_ids = [s.id for s in scenario.sites]
        self.task_ids = [t.id for t in scenario.tasks]
        self.location_ids = [loc.id for loc in scenario.locations]
        self.site_index = {sid: i for i, sid in enumerate(self.site_ids)}
        self.task_index = {tid: i for i, tid in enumerate(self.task_ids)}
        loc_index = {lid: i for i, lid in enumerate(self.location_ids)}

        cost = scenario.cost
        self.rate = np.array(
            [[cost.rate(lid, sid) for sid in self.site_ids] for lid in self.location_ids],
            dtype=np.float64,
        )
        self.task_location = np.array([loc_index[t.location] for t in scenario.tasks], dtype=np.int64)
        self.size = np.array([t.size for t in scenario.tasks], dtype=np.float64)
        self.task_rate = self.rate[self.task_location]
        self.trans_ticks = transfer_ticks(self.size, self.task_rate)
        self.comp_ticks = np.rint(self.size * cost.compute_rate * TICKS_PER_SECOND).astype(np.int64)
        self.exec_ticks = self.trans_ticks + self.comp_ticks[:, None]
        self.deploy_ticks = cost.deploy_ticks
        self.block_ticks = cost.block_ticks

    @property
    def n_tasks(self) -> int:
        return len(self.task_ids)

    @property
    def n_sites(self) -> int:
        return len(self.site_ids)


def transfer_ticks(size: np.ndarray, rate: np.ndarray, multiplier=None) -> np.ndarray:
    """Quantised ``size * rate [* multiplier]`` in ticks, broadcasting."""
    seconds = size[:, None] * rate if rate.ndim == 2 else size * rate
    if multiplier is not None:
        seconds = seconds * multiplier
    return np.rint(seconds * TICKS_PER_SECOND).astype(np.int64)


@dataclass(frozen=True)
class Scenario:
    """Sites, data locations, the task bag and the cost model.

    Entities are kept sorted by id; that order is the canonical order used
    for every tie-break.
    """

    locations: tuple[DataLocation, ...]
    sites: tuple[Site, ...]
    tasks: tuple[Task, ...]
    cost: CostModel

    def __post_init__(self):
        for name in ("locations", "sites", "tasks"):
            items = tuple(sorted(getattr(self, name), key=lambda x: x.id))
            ids = [x.id for x in items]
            if len(set(ids)) != len(ids):
                dup = sorted({i for i in ids if ids.count(i) > 1})
                raise ScenarioError(f"duplicate {name} ids: {dup}")
            object.__setattr__(self, name, items)
        if not self.sites:
            raise ScenarioError("scenario needs at least one site")
        if not self.tasks:
            raise ScenarioError("scenario needs at least one task")
        loc_ids = {loc.id for loc in self.locations}
        for task in self.tasks:
            if task.location not in loc_ids:
                raise ScenarioError(f"task {task.id!r} refers to unknown location {task.location!r}")
        for loc in self.locations:
            for site in self.sites:
                self.cost.rate(loc.id, site.id)

    @cached_property
    def arrays(self) -> ScenarioArrays:
        return ScenarioArrays(self)

    def task(self, task_id: str) -> Task:
        return self.tasks[self.arrays.task_index[task_id]]

    def site(self, site_id: str) -> Site:
        return self.sites[self.arrays.site_index[site_id]]


@dataclass(frozen=True)
class Plan:
    """Partition of the task bag over sites: ``site id -> frozenset of task ids``."""

    assignment: Mapping[str, frozenset]

    def __post_init__(self):
        normalized = {str(s): frozenset(ts) for s, ts in sorted(self.assignment.items())}
        object.__setattr__(self, "assignment", normalized)

    @classmethod
    def from_vector(cls, scenario: Scenario, vector: Sequence[int]) -> Plan:
        arr = scenario.arrays
        groups: dict[str, set] = {sid: set() for sid in arr.site_ids}
        for t, s in enumerate(vector):
            groups[arr.site_ids[int(s)]].add(arr.task_ids[t])
        return cls(groups)

    @classmethod
    def single_site(cls, scenario: Scenario, site_id: str) -> Plan:
        groups = {s.id: frozenset() for s in scenario.sites}
        groups[site_id] = frozenset(t.id for t in scenario.tasks)
        return cls(groups)

    def to_vector(self, scenario: Scenario) -> np.ndarray:
        """Task-index -> site-index vector; raises InvalidPlanError on any violation."""
        arr = scenario.arrays
        vector = np.full(arr.n_tasks, -1, dtype=np.int64)
        for sid, tids in self.assignment.items():
            if sid not in arr.site_index:
                raise InvalidPlanError(f"plan refers to unknown site {sid!r}")
            s = arr.site_index[sid]
            for tid in tids:
                t = arr.task_index.get(tid)
                if t is None:
                    raise InvalidPlanError(f"plan refers to unknown task {tid!r}")
                if vector[t] != -1:
                    raise InvalidPlanError(
                        f"task {tid!r} assigned to both {arr.site_ids[vector[t]]!r} and {sid!r}"
                    )
                vector[t] = s
        missing = np.flatnonzero(vector < 0)
        if missing.size:
            names = [arr.task_ids[i] for i in missing[:5]]
            raise InvalidPlanError(f"{missing.size} task(s) not assigned to any site, e.g. {names}")
        return vector

    @property
    def active_sites(self) -> tuple[str, ...]:
        return tuple(s for s, ts in self.assignment.items() if ts)

    @property
    def name(self) -> str:
        return f"plan_{len(self.active_sites)}"

    def key(self) -> tuple:
        """Hashable identity ignoring empty sites."""
        return tuple((s, tuple(sorted(ts))) for s, ts in self.assignment.items() if ts)

    def to_dict(self) -> dict[str, list[str]]:
        return {s: sorted(ts) for s, ts in self.assignment.items()}


def validate_plan(plan: Plan, scenario: Scenario) -> None:
    """Raise InvalidPlanError unless every task is on exactly one known site."""
    plan.to_vector(scenario)


def is_valid_plan(plan: Plan, scenario: Scenario) -> bool:
    try:
        validate_plan(plan, scenario)
    except InvalidPlanError:
        return False
    return True


@dataclass(frozen=True)
class PlanMetrics:
    per_site_exec: dict[str, float]
    per_site_running: dict[str, float]
    per_site_blocks: dict[str, int]
    total_blocks: int
    overall_exec: float
    total_cost: float
    score: float | None = None

    @property
    def overall_finish(self) -> float:
        """Wall-clock finish: slowest site's running time, deployment included."""
        return max(self.per_site_running.values())

    @property
    def active_sites(self) -> int:
        return sum(1 for v in self.per_site_running.values() if v > 0)

    def with_score(self, score: float) -> PlanMetrics:
        return replace(self, score=score)


# -- per-task and per-site equations -------------------------------------------------


def transfer_time(task: Task, site: Site, cost: CostModel) -> float:
    return task.size * cost.rate(task.location, site.id)


def compute_time(task: Task, cost: CostModel) -> float:
    return task.size * cost.compute_rate


def exec_time(task: Task, site: Site, cost: CostModel) -> float:
    return transfer_time(task, site, cost) + compute_time(task, cost)


def site_exec_time(plan: Plan, site: Site, scenario: Scenario) -> float:
    arr = scenario.arrays
    s = arr.site_index[site.id]
    ticks = sum(int(arr.exec_ticks[arr.task_index[t], s]) for t in plan.assignment.get(site.id, ()))
    return to_seconds(ticks)


def running_time(site_exec: float, cost: CostModel) -> float:
    if site_exec < 0:
        raise ValueError("site_exec must be >= 0")
    if site_exec == 0:
        return 0.0
    return cost.deploy_time + site_exec


def time_blocks(running: float, cost: CostModel) -> int:
    if running < 0:
        raise ValueError("running time must be >= 0")
    return ceil_div(to_ticks(running), cost.block_ticks)


def ceil_div(a: int, b: int) -> int:
    return -(-int(a) // int(b))


def running_ticks(exec_ticks: np.ndarray, deploy_ticks: int) -> np.ndarray:
    exec_ticks = np.asarray(exec_ticks, dtype=np.int64)
    return np.where(exec_ticks > 0, exec_ticks + deploy_ticks, 0)


def block_counts(running: np.ndarray, block_ticks: int) -> np.ndarray:
    return -(-np.asarray(running, dtype=np.int64) // block_ticks)


def site_loads(scenario: Scenario, vector: np.ndarray) -> np.ndarray:
    """Per-site summed execution ticks for an assignment vector."""
    arr = scenario.arrays
    loads = np.zeros(arr.n_sites, dtype=np.int64)
    np.add.at(loads, vector, arr.exec_ticks[np.arange(arr.n_tasks), vector])
    return loads


def metrics_from_loads(scenario: Scenario, loads: np.ndarray) -> PlanMetrics:
    arr = scenario.arrays
    running = running_ticks(loads, arr.deploy_ticks)
    blocks = block_counts(running, arr.block_ticks)
    total_blocks = int(blocks.sum())
    return PlanMetrics(
        per_site_exec={sid: to_seconds(v) for sid, v in zip(arr.site_ids, loads)},
        per_site_running={sid: to_seconds(v) for sid, v in zip(arr.site_ids, running)},
        per_site_blocks={sid: int(b) for sid, b in zip(arr.site_ids, blocks)},
        total_blocks=total_blocks,
        overall_exec=to_seconds(loads.max()),
        total_cost=total_blocks * scenario.cost.unit_cost,
    )


def plan_metrics(plan: Plan, scenario: Scenario) -> PlanMetrics:
    return metrics_from_loads(scenario, site_loads(scenario, plan.to_vector(scenario)))


# -- scoring -------------------------------------------------------------------------


def normalized_score(overall_exec: float, blocks: float, max_exec: float, max_blocks: float,
                     beta: float) -> float:
    """Weighted sum of makespan and block count, each divided by its maximum.

    A zero maximum means the term cannot discriminate and contributes 0.
    """
    exec_term = overall_exec / max_exec if max_exec > 0 else 0.0
    block_term = blocks / max_blocks if max_blocks > 0 else 0.0
    return beta * exec_term + (1.0 - beta) * block_term


def _exact_score(m: PlanMetrics, max_exec: Fraction, max_blocks: float, beta: Fraction) -> Fraction:
    exec_term = Fraction(m.overall_exec) / max_exec if max_exec > 0 else Fraction(0)
    block_term = Fraction(m.total_blocks) / Fraction(max_blocks) if max_blocks > 0 else Fraction(0)
    return beta * exec_term + (1 - beta) * block_term


def _as_metrics(candidates) -> list[PlanMetrics]:
    return [c[1] if isinstance(c, tuple) else c for c in candidates]


def score_plans(candidates: Iterable, beta: float) -> list[float]:
    """Scores for ``(Plan, PlanMetrics)`` pairs (or bare metrics), lower is better."""
    beta = check_beta(beta)
    metrics = _as_metrics(candidates)
    if not metrics:
        raise ValueError("score_plans needs at least one candidate")
    max_exec = max(m.overall_exec for m in metrics)
    max_blocks = max(m.total_blocks for m in metrics)
    return [normalized_score(m.overall_exec, m.total_blocks, max_exec, max_blocks, beta) for m in metrics]


def best_index(candidates: Iterable, beta: float) -> int:
    """Index of the minimum-score candidate, compared in exact rational arithmetic.

    Ties go to the earliest candidate.
    """
    beta_q = Fraction(check_beta(beta))
    metrics = _as_metrics(candidates)
    max_exec = Fraction(max(m.overall_exec for m in metrics))
    max_blocks = max(m.total_blocks for m in metrics)
    scores = [_exact_score(m, max_exec, max_blocks, beta_q) for m in metrics]
    return min(range(len(scores)), key=lambda i: (scores[i], i))
