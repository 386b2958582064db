"""Command-line front end.

Exit codes: 0 ok, 1 input error, 2 internal invariant breach, 3 budget
infeasible, 4 oracle enumeration cap exceeded.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from pathlib import Path

import click

from .heuristics import CandidateSet, centralised_plan, find_plan, find_plan_budget
from .model import BodtError, InvalidPlanError, Plan, PlanMetrics, Scenario, plan_metrics, validate_plan
from .oracle import OracleCapExceeded, compare_with_oracle, exact_optimum
from .sim import EVALUATION_COLUMNS, NoiseSpec, evaluate_plans, prediction_table, write_trace_csv
from .workload import GeneratorSpec, generate_scenario, load_scenario, save_scenario

SCHEMA = "bodt-report v1"
EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_BUDGET, EXIT_CAP = 0, 1, 2, 3, 4
DEFAULT_BETAS = tuple(round(i / 10, 1) for i in range(11))


class InternalInvariantError(BodtError):
    pass


def _checked(plan: Plan, scenario: Scenario) -> Plan:
    try:
        validate_plan(plan, scenario)
    except InvalidPlanError as exc:
        raise InternalInvariantError(f"generated plan is invalid: {exc}") from exc
    return plan


def _parse_betas(text: str) -> list[float]:
    try:
        betas = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None
    if not betas:
        raise click.BadParameter("need at least one beta")
    for b in betas:
        if not 0.0 <= b <= 1.0:
            raise click.BadParameter(f"beta {b} is not in the range 0<=x<=1")
    return betas


def _metrics_dict(m: PlanMetrics) -> dict:
    return {
        "total_blocks": m.total_blocks,
        "overall_exec": m.overall_exec,
        "overall_finish": m.overall_finish,
        "total_cost": m.total_cost,
        "active_sites": m.active_sites,
        "per_site_exec": m.per_site_exec,
        "per_site_running": m.per_site_running,
        "per_site_blocks": m.per_site_blocks,
    }


def _ratio(num: float, den: float) -> float | None:
    # a plan with no work has no meaningful ratio
    return num / den if den else None


def _candidate_rows(candidates: CandidateSet, beta: float | None = None) -> list[dict]:
    names = candidates.names()
    scores = candidates.scores(beta) if beta is not None else [None] * len(candidates)
    base = candidates.metrics[candidates.fewest_sites()]
    rows = []
    for i, (name, m, score) in enumerate(zip(names, candidates.metrics, scores)):
        rows.append({
            "index": i,
            "name": name,
            "active_sites": m.active_sites,
            "total_blocks": m.total_blocks,
            "overall_exec": m.overall_exec,
            "overall_finish": m.overall_finish,
            "total_cost": m.total_cost,
            "cost_increase": _ratio(m.total_blocks, base.total_blocks),
            "speedup": _ratio(base.overall_finish, m.overall_finish),
            "score": score,
        })
    return rows


def _header(command: str, scenario_path: str, params: dict) -> dict:
    digest = hashlib.sha256(Path(scenario_path).read_bytes()).hexdigest()
    return {"schema": SCHEMA, "command": command, "params": {"scenario": scenario_path, **params},
            "scenario_sha256": digest}


def _write_json(path: str, doc: dict) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path == "-":
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_csv(path: str, columns, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in columns})


def _load_plan(path: str) -> Plan:
    """Assignment from a plan, budget or oracle report, or a bare ``{"assignment": ...}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    node = doc
    for key in ("chosen", "plan", "oracle"):
        if isinstance(node, dict) and isinstance(node.get(key), dict):
            node = node[key]
            break
    assignment = node.get("assignment") if isinstance(node, dict) else None
    if not isinstance(assignment, dict):
        raise ValueError(f"{path}: no plan assignment found")
    return Plan(assignment)


def _plan_doc(name: str, plan: Plan, metrics: PlanMetrics) -> dict:
    return {"name": name, "assignment": plan.to_dict(), "metrics": _metrics_dict(metrics)}


scenario_opt = click.option("--scenario", "scenario_path", required=True,
                            type=click.Path(exists=True, dir_okay=False), help="Scenario file.")
out_opt = click.option("--out", "out_path", required=True, help="Output JSON report path ('-' for stdout).")
beta_opt = click.option("--beta", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True,
                        help="Weight on speed (1) versus cost (0).")


@click.group()
def cli():
    """Plan, compare and simulate bag-of-distributed-tasks executions."""


@cli.command("plan")
@scenario_opt
@beta_opt
@out_opt
def cmd_plan(scenario_path, beta, out_path):
    """Choose the candidate plan with the lowest score for BETA."""
    scenario = load_scenario(scenario_path)
    plan, candidates = find_plan(scenario, beta)
    _checked(plan, scenario)
    i = candidates.best(beta)
    doc = _header("plan", scenario_path, {"beta": beta})
    doc["chosen"] = {"index": i, **_plan_doc(candidates.names()[i], plan, candidates.metrics[i]),
                     "score": candidates.scores(beta)[i]}
    doc["candidates"] = _candidate_rows(candidates, beta)
    _write_json(out_path, doc)
    return EXIT_OK


@cli.command("sweep")
@scenario_opt
@click.option("--betas", default=",".join(map(str, DEFAULT_BETAS)), show_default=True,
              help="Comma-separated weights.")
@out_opt
@click.option("--csv", "csv_path", default=None, help="Also write the per-beta rows as CSV.")
def cmd_sweep(scenario_path, betas, out_path, csv_path):
    """Chosen plan for each weight, plus every candidate's score per weight."""
    betas = _parse_betas(betas)
    scenario = load_scenario(scenario_path)
    _, candidates = find_plan(scenario, betas[0])
    for p in candidates.plans:
        _checked(p, scenario)
    names = candidates.names()
    rows, matrix = [], []
    for beta in betas:
        scores = candidates.scores(beta)
        i = candidates.best(beta)
        m = candidates.metrics[i]
        rows.append({"beta": beta, "plan": names[i], "total_blocks": m.total_blocks,
                     "overall_exec": m.overall_exec, "score": scores[i]})
        matrix.append(scores)
    doc = _header("sweep", scenario_path, {"betas": betas})
    doc["rows"] = rows
    doc["candidates"] = _candidate_rows(candidates)
    doc["score_matrix"] = {"betas": betas, "plans": names, "scores": matrix}
    _write_json(out_path, doc)
    if csv_path:
        _write_csv(csv_path, ["beta", "plan", "total_blocks", "overall_exec", "score"], rows)
    return EXIT_OK


@cli.command("budget")
@scenario_opt
@click.option("--budget", type=click.IntRange(min=1), required=True, help="Maximum number of time blocks.")
@out_opt
def cmd_budget(scenario_path, budget, out_path):
    """Plan within a block budget; exit 3 if it cannot be met."""
    scenario = load_scenario(scenario_path)
    result = find_plan_budget(scenario, budget)
    _checked(result.plan, scenario)
    doc = _header("budget", scenario_path, {"budget": budget})
    doc["feasible"] = result.feasible
    doc["plan"] = _plan_doc(result.plan.name, result.plan, result.metrics)
    _write_json(out_path, doc)
    if not result.feasible:
        click.echo(f"budget of {budget} blocks is not reachable; best effort uses "
                   f"{result.metrics.total_blocks}", err=True)
        return EXIT_BUDGET
    return EXIT_OK


@cli.command("compare")
@scenario_opt
@beta_opt
@out_opt
def cmd_compare(scenario_path, beta, out_path):
    """Chosen decentralised plan against the best single-site plan."""
    scenario = load_scenario(scenario_path)
    plan, candidates = find_plan(scenario, beta)
    central = _checked(centralised_plan(scenario), scenario)
    _checked(plan, scenario)
    i = candidates.best(beta)
    dm, cm = candidates.metrics[i], plan_metrics(central, scenario)
    doc = _header("compare", scenario_path, {"beta": beta})
    doc["decentralised"] = _plan_doc(candidates.names()[i], plan, dm)
    doc["centralised"] = _plan_doc("centralised", central, cm)
    doc["centralised_vs_decentralised"] = {
        "cost_increase": _ratio(cm.total_blocks, dm.total_blocks),
        "speedup": _ratio(dm.overall_finish, cm.overall_finish),
        "blocks_saved": cm.total_blocks - dm.total_blocks,
    }
    base = candidates.metrics[candidates.fewest_sites()]
    rows = _candidate_rows(candidates, beta)
    rows.append({"index": None, "name": "centralised", "active_sites": cm.active_sites,
                 "total_blocks": cm.total_blocks, "overall_exec": cm.overall_exec,
                 "overall_finish": cm.overall_finish, "total_cost": cm.total_cost,
                 "cost_increase": _ratio(cm.total_blocks, base.total_blocks),
                 "speedup": _ratio(base.overall_finish, cm.overall_finish), "score": None})
    doc["cost_vs_speedup"] = {"base": candidates.names()[candidates.fewest_sites()], "rows": rows}
    _write_json(out_path, doc)
    return EXIT_OK


@cli.command("simulate")
@scenario_opt
@click.option("--plan", "plan_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Plan JSON (as written by 'plan'); otherwise every candidate for --beta is replayed.")
@beta_opt
@click.option("--betas", default=None, help="Weights for the predicted-vs-actual table (default: --beta).")
@click.option("--reps", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--sigma", type=click.FloatRange(min=0.0), default=0.0, show_default=True,
              help="Log-normal sigma of per-task transfer slowdowns.")
@click.option("--seed", type=int, default=0, show_default=True)
@out_opt
@click.option("--csv", "csv_path", default=None, help="Also write the evaluation table as CSV.")
@click.option("--trace-dir", default=None, type=click.Path(file_okay=False),
              help="Write one event CSV per plan and repetition here.")
def cmd_simulate(scenario_path, plan_path, beta, betas, reps, sigma, seed, out_path, csv_path, trace_dir):
    """Replay plans and compare predicted with simulated blocks and times."""
    scenario = load_scenario(scenario_path)
    noise = NoiseSpec(seed=seed, sigma=sigma)
    params = {"plan": plan_path, "beta": beta, "betas": None, "reps": reps, "sigma": sigma, "seed": seed}
    chosen = None
    if plan_path:
        try:
            plan = _load_plan(plan_path)
            validate_plan(plan, scenario)
        except (ValueError, KeyError, AttributeError, TypeError) as exc:
            raise click.BadParameter(str(exc), param_hint="--plan") from None
        named = [(plan.name, plan)]
        base = None
        beta_list = []
    else:
        plan, candidates = find_plan(scenario, beta)
        names = candidates.names()
        named = [(n, _checked(p, scenario)) for n, p in zip(names, candidates.plans)]
        named.append(("centralised", _checked(centralised_plan(scenario), scenario)))
        chosen = names[candidates.best(beta)]
        base = names[candidates.fewest_sites()]
        beta_list = _parse_betas(betas) if betas else [beta]
        params["betas"] = beta_list

    rows = evaluate_plans(named, scenario, reps, noise, base=base)
    doc = _header("simulate", scenario_path, params)
    doc["chosen"] = chosen
    doc["base"] = base or rows[0].name
    doc["rows"] = [r.as_row() for r in rows]
    doc["mispredicted"] = [r.name for r in rows if not r.accurate]
    if beta_list:
        candidates_only = [r for r in rows if r.name != "centralised"]
        doc["prediction_table"] = prediction_table(candidates_only, beta_list)
    _write_json(out_path, doc)
    if csv_path:
        _write_csv(csv_path, EVALUATION_COLUMNS, doc["rows"])
    if trace_dir:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
        for r in rows:
            for rep, trace in enumerate(r.traces):
                write_trace_csv(trace, Path(trace_dir) / f"{r.name}_rep{rep}.csv")
    return EXIT_OK


@cli.command("oracle")
@scenario_opt
@beta_opt
@out_opt
def cmd_oracle(scenario_path, beta, out_path):
    """Exact optimum by enumeration, the heuristic's choice, and the gap."""
    scenario = load_scenario(scenario_path)
    # without pruning both kernel paths visit every assignment, so the report is path-independent
    report = compare_with_oracle(scenario, beta, prune=False)
    blocks = exact_optimum(scenario, beta, "blocks", prune=False)
    o = report.oracle
    doc = _header("oracle", scenario_path, {"beta": beta})
    doc["oracle"] = {**_plan_doc(o.best_plan.name, o.best_plan, o.best_metrics), "score": o.best_score,
                     "enumerated": o.enumerated, "max_exec": o.max_exec, "max_blocks": o.max_blocks,
                     "min_blocks": blocks.best_blocks}
    doc["heuristic"] = {**_plan_doc(report.heuristic_plan.name, report.heuristic_plan,
                                    report.heuristic_metrics), "score": report.heuristic_score}
    doc["gap"] = report.gap
    _write_json(out_path, doc)
    return EXIT_OK


@cli.command("generate")
@click.option("--out", "out_path", required=True, help="Scenario file to write.")
@click.option("--locations", type=click.IntRange(min=1), default=GeneratorSpec.n_locations, show_default=True)
@click.option("--sites", type=click.IntRange(min=1), default=GeneratorSpec.n_sites, show_default=True)
@click.option("--tasks", type=click.IntRange(min=1), default=GeneratorSpec.n_tasks, show_default=True)
@click.option("--deploy-time", type=click.FloatRange(min=0.0), default=GeneratorSpec.deploy_time, show_default=True)
@click.option("--block-seconds", type=click.FloatRange(min=0.0, min_open=True),
              default=GeneratorSpec.block_seconds, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_generate(out_path, locations, sites, tasks, deploy_time, block_seconds, seed):
    """Write a synthetic ring-geometry scenario."""
    spec = GeneratorSpec(n_locations=locations, n_sites=sites, n_tasks=tasks, deploy_time=deploy_time,
                         block_seconds=block_seconds, seed=seed)
    save_scenario(generate_scenario(spec), out_path)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return cli.main(args=argv, prog_name="bodt", standalone_mode=False) or EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except click.Abort:
        return EXIT_INPUT
    except OracleCapExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CAP
    except InternalInvariantError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL
    except (BodtError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
