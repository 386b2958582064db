"""Scenario files and synthetic scenario generation.

File format (YAML subset, UTF-8)::

    format: bodt-scenario v1
    units: {time: seconds, rate: seconds-per-unit, cost: currency-per-block}
    cost: {compute_rate: 1.5, deploy_time: 120.0, block_seconds: 3600.0, unit_cost: 1.0}
    sites:
    - {id: site0, label: region-0}
    locations:
    - {id: loc00, label: node-00}
    transfer:          # one row per location, one column per site in `sites` order
      loc00: [0.7, 1.3]
    tasks:
    - {id: t0000, location: loc00, size: 1.25}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .model import (
    BodtError,
    CostModel,
    DataLocation,
    DEFAULT_BLOCK_SECONDS,
    Scenario,
    ScenarioError,
    Site,
    Task,
)

FORMAT_TAG = "bodt-scenario v1"
UNITS = {"time": "seconds", "rate": "seconds-per-unit", "cost": "currency-per-block"}


class ScenarioParseError(BodtError, ValueError):
    """The file is not well-formed; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


def _require(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return mapping[key]


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    tag = doc.get("format")
    if tag != FORMAT_TAG:
        raise ScenarioError(f"unsupported format header {tag!r}, expected {FORMAT_TAG!r}")
    units = doc.get("units", UNITS)
    if units != UNITS:
        raise ScenarioError(f"units must be {UNITS}, got {units}")

    cost_doc = _require(doc, "cost", "document")
    sites = [Site(str(_require(s, "id", "site")), str(s.get("label", ""))) for s in _require(doc, "sites", "document")]
    locations = [DataLocation(str(_require(loc, "id", "location")), str(loc.get("label", "")))
                 for loc in _require(doc, "locations", "document")]
    site_ids = [s.id for s in sites]

    rows = _require(doc, "transfer", "document") or {}
    transfer = {}
    for loc in locations:
        row = rows.get(loc.id)
        if row is None:
            raise ScenarioError(f"transfer matrix has no row for location {loc.id!r}")
        if not isinstance(row, list):
            raise ScenarioError(f"transfer row for {loc.id!r} must be a list")
        if len(row) < len(site_ids):
            missing = site_ids[len(row)]
            raise ScenarioError(f"missing transfer rate for (location={loc.id!r}, site={missing!r})")
        if len(row) > len(site_ids):
            raise ScenarioError(f"transfer row for {loc.id!r} has {len(row)} entries for {len(site_ids)} sites")
        transfer[loc.id] = {sid: _number(v, f"transfer[{loc.id}][{sid}]") for sid, v in zip(site_ids, row)}
    unknown = set(rows) - {loc.id for loc in locations}
    if unknown:
        raise ScenarioError(f"transfer rows for unknown locations: {sorted(unknown)}")

    cost = CostModel(
        transfer=transfer,
        compute_rate=_number(_require(cost_doc, "compute_rate", "cost"), "compute_rate"),
        deploy_time=_number(_require(cost_doc, "deploy_time", "cost"), "deploy_time"),
        block_seconds=_number(cost_doc.get("block_seconds", DEFAULT_BLOCK_SECONDS), "block_seconds"),
        unit_cost=_number(cost_doc.get("unit_cost", 1.0), "unit_cost"),
    )
    tasks = [
        Task(str(_require(t, "id", "task")), str(_require(t, "location", "task")),
             _number(_require(t, "size", "task"), "size"))
        for t in _require(doc, "tasks", "document")
    ]
    return Scenario(tuple(locations), tuple(sites), tuple(tasks), cost)


def _number(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{name} must be a number, got {value!r}")
    return float(value)


def scenario_to_dict(scenario: Scenario) -> dict:
    c = scenario.cost
    return {
        "format": FORMAT_TAG,
        "units": dict(UNITS),
        "cost": {
            "compute_rate": c.compute_rate,
            "deploy_time": c.deploy_time,
            "block_seconds": c.block_seconds,
            "unit_cost": c.unit_cost,
        },
        "sites": [{"id": s.id, "label": s.label} for s in scenario.sites],
        "locations": [{"id": loc.id, "label": loc.label} for loc in scenario.locations],
        "transfer": {loc.id: [c.transfer[loc.id][s.id] for s in scenario.sites]
                     for loc in scenario.locations},
        "tasks": [{"id": t.id, "location": t.location, "size": t.size} for t in scenario.tasks],
    }


def dumps_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False, default_flow_style=None,
                          allow_unicode=True, width=120)


def loads_scenario(text: str) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ScenarioParseError(f"malformed scenario: {exc.problem or exc}",
                                 mark.line + 1 if mark else None,
                                 mark.column + 1 if mark else None) from None
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"malformed scenario: {exc}") from None
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(scenario), encoding="utf-8")


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape and cost parameters for a synthetic scenario.

    Defaults give a 47-location, 8-site, 3290-task bag with hour-long blocks.
    """

    n_locations: int = 47
    n_sites: int = 8
    n_tasks: int = 3290
    size_range: tuple[float, float] = (0.5, 1.5)
    transfer_range: tuple[float, float] = (0.7, 4.0)
    compute_rate: float = 1.5
    deploy_time: float = 120.0
    block_seconds: float = DEFAULT_BLOCK_SECONDS
    unit_cost: float = 1.0
    seed: int = 0
    jitter: float = 0.35

    def validate(self) -> None:
        for name in ("n_locations", "n_sites", "n_tasks"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        lo, hi = self.size_range
        if not (0 < lo <= hi and math.isfinite(hi)):
            raise ValueError(f"size_range must satisfy 0 < low <= high, got {self.size_range}")
        lo, hi = self.transfer_range
        if not (0 <= lo <= hi and math.isfinite(hi)):
            raise ValueError(f"transfer_range must satisfy 0 <= low <= high, got {self.transfer_range}")
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must lie in [0, 1)")


def generate_scenario(spec: GeneratorSpec = GeneratorSpec()) -> Scenario:
    """Sites evenly spaced on a ring; each location sits near a home site.

    Homes are dealt round-robin so every site has nearby data. A location's
    angle is its home's angle plus a jitter of up to ``jitter`` half-gaps, so
    its nearest site is its home. Rates grow linearly with ring distance
    from ``transfer_range[0]`` (same point) to ``transfer_range[1]`` (opposite).
    Task locations are uniform over locations.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n_loc, n_site, n_task = int(spec.n_locations), int(spec.n_sites), int(spec.n_tasks)
    loc_w, site_w, task_w = len(str(n_loc - 1)), len(str(n_site - 1)), len(str(n_task - 1))

    site_angle = 2 * np.pi * np.arange(n_site) / n_site
    home = rng.permutation(np.arange(n_loc) % n_site)
    half_gap = np.pi / n_site
    loc_angle = site_angle[home] + rng.uniform(-spec.jitter, spec.jitter, n_loc) * half_gap
    diff = np.abs(loc_angle[:, None] - site_angle[None, :]) % (2 * np.pi)
    distance = np.minimum(diff, 2 * np.pi - diff) / np.pi
    lo, hi = spec.transfer_range
    rate = np.round(lo + (hi - lo) * distance, 4)

    sites = tuple(Site(f"site{i:0{site_w}d}", f"region-{i}") for i in range(n_site))
    locations = tuple(DataLocation(f"loc{i:0{loc_w}d}", f"node-{i}") for i in range(n_loc))
    transfer = {loc.id: {s.id: float(rate[i, j]) for j, s in enumerate(sites)}
                for i, loc in enumerate(locations)}
    task_loc = rng.integers(0, n_loc, n_task)
    sizes = np.round(rng.uniform(*spec.size_range, n_task), 3)
    sizes = np.maximum(sizes, 0.001)
    tasks = tuple(Task(f"t{i:0{task_w}d}", locations[task_loc[i]].id, float(sizes[i])) for i in range(n_task))
    cost = CostModel(transfer, spec.compute_rate, spec.deploy_time, spec.block_seconds, spec.unit_cost)
    return Scenario(locations, sites, tasks, cost)
