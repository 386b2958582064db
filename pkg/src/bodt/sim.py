"""Discrete-event replay of plans.

Each active site deploys, then runs its tasks one after another (fetch the
data, then compute); sites run in parallel. With no noise the replay
reproduces the model's running times exactly. Noise multiplies each task's
transfer time by a log-normal factor drawn from a seeded stream.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import (
    Plan,
    PlanMetrics,
    Scenario,
    TICKS_PER_SECOND,
    best_index,
    ceil_div,
    plan_metrics,
    to_seconds,
    transfer_ticks,
)

EVENT_KINDS = ("deploy_start", "deploy_end", "transfer_start", "transfer_end",
               "compute_start", "compute_end")
TASK_ORDERS = ("canonical", "by_id")


@dataclass(frozen=True)
class NoiseSpec:
    seed: int = 0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")

    def multipliers(self, n_tasks: int, repetition: int = 0) -> np.ndarray:
        """One transfer multiplier per task, independent of the plan being replayed."""
        if self.sigma == 0:
            return np.ones(n_tasks)
        rng = np.random.default_rng(np.random.SeedSequence([int(self.seed), int(repetition)]))
        return rng.lognormal(0.0, self.sigma, size=n_tasks)


@dataclass(frozen=True)
class Event:
    timestamp: float
    site: str
    task: str
    kind: str


@dataclass(frozen=True)
class SimTrace:
    events: tuple[Event, ...]
    per_site_finish: dict[str, float]
    per_site_exec: dict[str, float]
    measured_blocks: dict[str, int]
    transfer_seconds: float
    transfer_seconds_per_unit: float
    data_units: float

    @property
    def total_blocks(self) -> int:
        return sum(self.measured_blocks.values())

    @property
    def finish(self) -> float:
        return max(self.per_site_finish.values())

    @property
    def overall_exec(self) -> float:
        return max(self.per_site_exec.values())


def replay(plan: Plan, scenario: Scenario, multipliers: np.ndarray | None = None,
           task_order: str = "canonical") -> SimTrace:
    """Replay with explicit per-task transfer multipliers (``None`` means all 1)."""
    if task_order not in TASK_ORDERS:
        raise ValueError(f"task_order must be one of {TASK_ORDERS}")
    arr = scenario.arrays
    vector = plan.to_vector(scenario)
    rows = np.arange(arr.n_tasks)
    task_rate = arr.task_rate[rows, vector]
    trans = transfer_ticks(arr.size, task_rate, multipliers)
    comp = arr.comp_ticks
    dt, block = arr.deploy_ticks, arr.block_ticks

    events: list[Event] = []
    finish, execs, blocks = {}, {}, {}
    for s, sid in enumerate(arr.site_ids):
        tasks = [int(t) for t in np.flatnonzero(vector == s)]
        if task_order == "by_id":
            tasks.sort(key=lambda t: arr.task_ids[t])
        work = int(trans[tasks].sum() + comp[tasks].sum())
        clock = 0
        if tasks:
            # a site whose tasks take no time is never started
            if work > 0:
                events.append(Event(0.0, sid, "", "deploy_start"))
                clock = dt
                events.append(Event(to_seconds(clock), sid, "", "deploy_end"))
            for t in tasks:
                tid = arr.task_ids[t]
                events.append(Event(to_seconds(clock), sid, tid, "transfer_start"))
                clock += int(trans[t])
                events.append(Event(to_seconds(clock), sid, tid, "transfer_end"))
                events.append(Event(to_seconds(clock), sid, tid, "compute_start"))
                clock += int(comp[t])
                events.append(Event(to_seconds(clock), sid, tid, "compute_end"))
        finish[sid] = to_seconds(clock)
        execs[sid] = to_seconds(work)
        blocks[sid] = ceil_div(clock, block)

    total_transfer = int(trans.sum())
    return SimTrace(
        events=tuple(events),
        per_site_finish=finish,
        per_site_exec=execs,
        measured_blocks=blocks,
        transfer_seconds=to_seconds(total_transfer),
        transfer_seconds_per_unit=float(np.mean(trans / TICKS_PER_SECOND / arr.size)),
        data_units=float(arr.size.sum()),
    )


def simulate(plan: Plan, scenario: Scenario, noise: NoiseSpec | None = None,
             task_order: str = "canonical", repetition: int = 0) -> SimTrace:
    multipliers = None if noise is None else noise.multipliers(scenario.arrays.n_tasks, repetition)
    return replay(plan, scenario, multipliers, task_order)


def write_trace_csv(trace: SimTrace, target) -> None:
    """``timestamp,site,task,kind`` rows with a header; ``target`` is a path or text stream."""
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_trace_csv(trace, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(["timestamp", "site", "task", "kind"])
    for e in trace.events:
        writer.writerow([repr(e.timestamp), e.site, e.task, e.kind])


def trace_csv(trace: SimTrace) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class PlanEvaluation:
    name: str
    active_sites: int
    predicted_blocks: int
    predicted_overall_exec: float
    predicted_finish: float
    sim_blocks_mean: float
    sim_blocks_max: int
    sim_overall_exec_mean: float
    sim_finish_mean: float
    cost_increase: float | None
    speedup: float | None
    transfer_seconds_per_unit: float
    transfer_units_per_second: float | None
    accurate: bool
    traces: tuple[SimTrace, ...] = field(default=(), repr=False, compare=False)

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in EVALUATION_COLUMNS}


EVALUATION_COLUMNS = (
    "name", "active_sites", "predicted_blocks", "sim_blocks_mean", "sim_blocks_max", "accurate",
    "predicted_overall_exec", "sim_overall_exec_mean", "predicted_finish", "sim_finish_mean",
    "cost_increase", "speedup", "transfer_seconds_per_unit", "transfer_units_per_second",
)


def evaluate_plans(plans: Sequence[tuple[str, Plan]], scenario: Scenario, repetitions: int = 1,
                   noise: NoiseSpec | None = None, base: str | None = None) -> list[PlanEvaluation]:
    """Predicted vs simulated blocks and times for each named plan.

    ``cost_increase`` and ``speedup`` are relative to ``base`` (default: the
    plan with the fewest active sites, earliest on ties), computed from the
    simulated means: blocks ratio plan/base and finish ratio base/plan. Both
    are None when the denominator is zero (a bag with no work).
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not plans:
        return []
    raw = []
    for name, plan in plans:
        predicted = plan_metrics(plan, scenario)
        traces = tuple(simulate(plan, scenario, noise, repetition=r) for r in range(repetitions))
        raw.append((name, predicted, traces))

    names = [name for name, _, _ in raw]
    if base is None:
        b = min(range(len(raw)), key=lambda i: (raw[i][1].active_sites, i))
    elif base in names:
        b = names.index(base)
    else:
        raise KeyError(f"unknown base plan {base!r}")

    def mean(values):
        return float(np.mean(values))

    base_blocks = mean([t.total_blocks for t in raw[b][2]])
    base_finish = mean([t.finish for t in raw[b][2]])
    rows = []
    for name, predicted, traces in raw:
        blocks = [t.total_blocks for t in traces]
        finish = mean([t.finish for t in traces])
        sim_blocks = mean(blocks)
        transfer = sum(t.transfer_seconds for t in traces)
        rows.append(PlanEvaluation(
            name=name,
            active_sites=predicted.active_sites,
            predicted_blocks=predicted.total_blocks,
            predicted_overall_exec=predicted.overall_exec,
            predicted_finish=predicted.overall_finish,
            sim_blocks_mean=sim_blocks,
            sim_blocks_max=max(blocks),
            sim_overall_exec_mean=mean([t.overall_exec for t in traces]),
            sim_finish_mean=finish,
            cost_increase=sim_blocks / base_blocks if base_blocks else None,
            speedup=base_finish / finish if finish else None,
            transfer_seconds_per_unit=mean([t.transfer_seconds_per_unit for t in traces]),
            transfer_units_per_second=(sum(t.data_units for t in traces) / transfer) if transfer else None,
            accurate=all(x == predicted.total_blocks for x in blocks),
            traces=traces,
        ))
    return rows


@dataclass(frozen=True)
class _Measured:
    overall_exec: float
    total_blocks: float


def prediction_table(rows: Sequence[PlanEvaluation], betas: Sequence[float]) -> list[dict]:
    """Per weight: plan chosen from predictions vs plan that scores best when replayed."""
    predicted = [_Measured(r.predicted_overall_exec, r.predicted_blocks) for r in rows]
    measured = [_Measured(r.sim_overall_exec_mean, r.sim_blocks_mean) for r in rows]
    out = []
    for beta in betas:
        p = rows[best_index(predicted, beta)].name
        a = rows[best_index(measured, beta)].name
        out.append({"beta": float(beta), "prediction": p, "actual": a, "accurate": p == a})
    return out


def metrics_summary(m: PlanMetrics) -> dict:
    return {
        "total_blocks": m.total_blocks,
        "overall_exec": m.overall_exec,
        "overall_finish": m.overall_finish,
        "total_cost": m.total_cost,
        "active_sites": m.active_sites,
    }
