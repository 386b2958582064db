import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bodt.heuristics import centralised_plan, find_plan
from bodt.model import InvalidPlanError, Plan, plan_metrics
from bodt.sim import (
    EVENT_KINDS,
    NoiseSpec,
    evaluate_plans,
    prediction_table,
    replay,
    simulate,
    trace_csv,
    write_trace_csv,
)

from helpers import make_scenario, random_plan, scenarios


def test_one_site_finish_is_deploy_plus_work():
    s = make_scenario([[1.0]], [(0, 10.0), (0, 20.0)], deploy_time=5.0)
    trace = simulate(Plan.single_site(s, "s0"), s)
    assert trace.per_site_finish == {"s0": 35.0}
    assert [e.kind for e in trace.events[:3]] == ["deploy_start", "deploy_end", "transfer_start"]
    assert trace.events[-1].timestamp == 35.0


def test_rejects_invalid_plan(small):
    with pytest.raises(InvalidPlanError):
        simulate(Plan({"siteA": {"t0"}}), small)


def test_bad_task_order(small):
    with pytest.raises(ValueError):
        replay(centralised_plan(small), small, task_order="random")


def test_by_id_order_matches_canonical(small):
    plan = centralised_plan(small)
    assert replay(plan, small, task_order="by_id") == replay(plan, small)


def test_noise_spec_validation_and_zero_sigma():
    with pytest.raises(ValueError):
        NoiseSpec(sigma=-0.1)
    assert np.array_equal(NoiseSpec(seed=3, sigma=0.0).multipliers(5, 2), np.ones(5))


def test_noise_streams_differ_by_seed_and_repetition():
    a = NoiseSpec(seed=1, sigma=0.5)
    assert np.array_equal(a.multipliers(8, 0), a.multipliers(8, 0))
    assert not np.array_equal(a.multipliers(8, 0), a.multipliers(8, 1))
    assert not np.array_equal(a.multipliers(8, 0), NoiseSpec(seed=2, sigma=0.5).multipliers(8, 0))


def test_same_seed_same_trace(small):
    plan, _ = find_plan(small, 0.5)
    noise = NoiseSpec(seed=9, sigma=0.3)
    assert simulate(plan, small, noise, repetition=1) == simulate(plan, small, noise, repetition=1)


def test_trace_csv_format():
    s = make_scenario([[1.0]], [(0, 1.5)], deploy_time=0.25)
    text = trace_csv(simulate(Plan.single_site(s, "s0"), s))
    lines = text.splitlines()
    assert lines[0] == "timestamp,site,task,kind"
    assert lines[1] == "0.0,s0,,deploy_start"
    assert lines[-1] == "1.75,s0,t0,compute_end"
    buf = io.StringIO()
    write_trace_csv(simulate(Plan.single_site(s, "s0"), s), buf)
    assert buf.getvalue() == text


def test_trace_csv_to_path(tmp_path, small):
    path = tmp_path / "trace.csv"
    trace = simulate(centralised_plan(small), small)
    write_trace_csv(trace, path)
    assert path.read_text(encoding="utf-8") == trace_csv(trace)


def test_zero_work_site_never_deploys():
    s = make_scenario([[0.0, 1.0]], [(0, 1.0)])
    trace = simulate(Plan.single_site(s, "s0"), s)
    assert {e.kind for e in trace.events}.isdisjoint({"deploy_start", "deploy_end"})
    assert {e.timestamp for e in trace.events} == {0.0} and trace.per_site_finish["s0"] == 0.0
    assert trace.total_blocks == 0 == plan_metrics(Plan.single_site(s, "s0"), s).total_blocks


def test_base_compared_to_itself(small):
    _, cands = find_plan(small, 0.0)
    named = list(zip(cands.names(), cands.plans))
    rows = evaluate_plans(named, small, repetitions=3)
    base = rows[cands.fewest_sites()]
    assert base.cost_increase == 1.0 and base.speedup == 1.0
    assert all(r.accurate for r in rows)
    assert all(r.sim_blocks_mean == r.predicted_blocks for r in rows)
    assert all(r.traces[0] == r.traces[1] == r.traces[2] for r in rows)


def test_explicit_base_and_unknown_base(small):
    named = [("c", centralised_plan(small)), ("d", find_plan(small, 1.0)[0])]
    rows = evaluate_plans(named, small, base="d")
    assert rows[1].speedup == 1.0
    assert rows[0].speedup < 1.0
    with pytest.raises(KeyError):
        evaluate_plans(named, small, base="nope")
    with pytest.raises(ValueError):
        evaluate_plans(named, small, repetitions=0)


def test_prediction_table_deterministic_agrees(small):
    _, cands = find_plan(small, 0.0)
    rows = evaluate_plans(list(zip(cands.names(), cands.plans)), small)
    table = prediction_table(rows, [0.0, 1.0])
    assert [r["beta"] for r in table] == [0.0, 1.0]
    assert all(r["accurate"] for r in table)
    assert table[0]["prediction"] == "plan_2" and table[1]["prediction"] == "plan_3"


# -- properties --------------------------------------------------------------------------


@given(s=scenarios(), seed=st.integers(0, 2**32 - 1))
def test_deterministic_replay_matches_model(s, seed):
    plan = random_plan(s, np.random.default_rng(seed))
    m = plan_metrics(plan, s)
    trace = simulate(plan, s, NoiseSpec(seed=seed, sigma=0.0))
    assert trace.per_site_finish == m.per_site_running
    assert trace.measured_blocks == m.per_site_blocks
    assert trace.finish == m.overall_finish
    assert trace.overall_exec == m.overall_exec


@given(s=scenarios(), seed=st.integers(0, 2**32 - 1))
def test_event_ordering(s, seed):
    plan = random_plan(s, np.random.default_rng(seed))
    trace = simulate(plan, s, NoiseSpec(seed=seed, sigma=0.4))
    by_site = {}
    for e in trace.events:
        assert e.kind in EVENT_KINDS
        by_site.setdefault(e.site, []).append(e)
    for sid, events in by_site.items():
        stamps = [e.timestamp for e in events]
        assert stamps == sorted(stamps)
        assert trace.per_site_finish[sid] == stamps[-1]
        for tid in {e.task for e in events if e.task}:
            kinds = [e.kind for e in events if e.task == tid]
            assert kinds == list(EVENT_KINDS[2:])
    for sid, tasks in plan.assignment.items():
        if not tasks:
            assert sid not in by_site


@given(s=scenarios(), seed=st.integers(0, 2**32 - 1))
def test_slowdowns_never_finish_earlier(s, seed):
    rng = np.random.default_rng(seed)
    plan = random_plan(s, rng)
    slow = 1.0 + rng.exponential(1.0, len(s.tasks))
    base = replay(plan, s)
    noisy = replay(plan, s, slow)
    for sid in base.per_site_finish:
        assert noisy.per_site_finish[sid] >= base.per_site_finish[sid]
