"""Scenario builders and an independent brute-force reference used across tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from bodt.model import CostModel, DataLocation, Plan, Scenario, Site, Task


def make_scenario(rates, tasks, *, compute_rate=0.0, deploy_time=0.0, block_seconds=3600.0,
                  unit_cost=1.0) -> Scenario:
    """``rates[i][j]`` is location i to site j; ``tasks`` is a list of (location index, size)."""
    n_loc, n_site = len(rates), len(rates[0])
    locations = [DataLocation(f"l{i}", "") for i in range(n_loc)]
    sites = [Site(f"s{j}", "") for j in range(n_site)]
    transfer = {f"l{i}": {f"s{j}": float(rates[i][j]) for j in range(n_site)} for i in range(n_loc)}
    width = len(str(max(len(tasks) - 1, 0)))
    bag = [Task(f"t{k:0{width}d}", f"l{loc}", float(size)) for k, (loc, size) in enumerate(tasks)]
    cost = CostModel(transfer, compute_rate, deploy_time, block_seconds, unit_cost)
    return Scenario(tuple(locations), tuple(sites), tuple(bag), cost)


def random_scenario(rng: np.random.Generator, max_tasks: int = 20, max_sites: int = 5,
                    min_tasks: int = 1, min_sites: int = 1, block_seconds: float = 100.0) -> Scenario:
    """Small scenario whose site loads span a few blocks, so packing decisions matter."""
    n_tasks = int(rng.integers(min_tasks, max_tasks + 1))
    n_sites = int(rng.integers(min_sites, max_sites + 1))
    n_loc = int(rng.integers(1, 5))
    rates = np.round(rng.uniform(0.0, 12.0, (n_loc, n_sites)), 2)
    tasks = [(int(rng.integers(n_loc)), round(float(rng.uniform(0.2, 4.0)), 2)) for _ in range(n_tasks)]
    return make_scenario(rates.tolist(), tasks, compute_rate=round(float(rng.uniform(0, 3)), 2),
                         deploy_time=round(float(rng.uniform(0, 25)), 1), block_seconds=block_seconds)


@st.composite
def scenarios(draw, max_tasks=8, max_sites=4, min_sites=1):
    n_sites = draw(st.integers(min_sites, max_sites))
    n_loc = draw(st.integers(1, 3))
    rate = st.floats(0, 10, allow_nan=False).map(lambda x: round(x, 2))
    rates = draw(st.lists(st.lists(rate, min_size=n_sites, max_size=n_sites), min_size=n_loc, max_size=n_loc))
    task = st.tuples(st.integers(0, n_loc - 1), st.floats(0.1, 5, allow_nan=False).map(lambda x: round(x, 2)))
    tasks = draw(st.lists(task, min_size=1, max_size=max_tasks))
    return make_scenario(rates, tasks,
                         compute_rate=draw(st.sampled_from([0.0, 0.5, 1.0, 2.5])),
                         deploy_time=draw(st.sampled_from([0.0, 5.0, 12.5])),
                         block_seconds=draw(st.sampled_from([20.0, 60.0, 100.0])))


def random_plan(scenario: Scenario, rng: np.random.Generator) -> Plan:
    return Plan.from_vector(scenario, rng.integers(0, len(scenario.sites), len(scenario.tasks)))


# -- reference evaluation in exact rationals, no shared code with the package ------------


def _q(x: float) -> Fraction:
    # quantise to microseconds like any sane clock
    return Fraction(round(x * 1_000_000), 1_000_000)


def ref_exec(scenario: Scenario, task: Task, site: Site) -> Fraction:
    c = scenario.cost
    return _q(task.size * c.transfer[task.location][site.id]) + _q(task.size * c.compute_rate)


def ref_metrics(scenario: Scenario, vector) -> tuple[Fraction, int]:
    """(makespan, total blocks) of a task-index -> site-index assignment."""
    c = scenario.cost
    loads = [Fraction(0)] * len(scenario.sites)
    for t, s in enumerate(vector):
        loads[s] += ref_exec(scenario, scenario.tasks[t], scenario.sites[s])
    block = _q(c.block_seconds)
    blocks = 0
    for load in loads:
        if load > 0:
            blocks += math.ceil((load + _q(c.deploy_time)) / block)
    return max(loads), blocks


def ref_score(makespan, blocks, max_exec, max_blocks, beta) -> Fraction:
    beta = Fraction(beta)
    e = Fraction(makespan) / max_exec if max_exec else Fraction(0)
    b = Fraction(blocks) / max_blocks if max_blocks else Fraction(0)
    return beta * e + (1 - beta) * b


def brute_force(scenario: Scenario, beta: float = 0.5):
    """Every assignment's metrics; returns (min score, min makespan, min blocks, max_exec, max_blocks)."""
    rows = [ref_metrics(scenario, v)
            for v in itertools.product(range(len(scenario.sites)), repeat=len(scenario.tasks))]
    max_exec = max(r[0] for r in rows)
    max_blocks = max(r[1] for r in rows)
    best = min(ref_score(m, b, max_exec, max_blocks, beta) for m, b in rows)
    return best, min(r[0] for r in rows), min(r[1] for r in rows), max_exec, max_blocks
