import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bodt.heuristics import nearest_plan
from bodt.model import ScenarioError
from bodt.workload import (
    GeneratorSpec,
    ScenarioParseError,
    dumps_scenario,
    generate_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
)

from conftest import DATA, FIXTURES
from helpers import scenarios

MINIMAL = (DATA / "minimal.yaml").read_text(encoding="utf-8")


def test_minimal_fixture_counts():
    s = load_scenario(DATA / "minimal.yaml")
    assert (len(s.locations), len(s.sites), len(s.tasks)) == (1, 1, 1)
    assert s.cost.block_seconds == 60.0


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_are_canonical(name):
    text = (DATA / name).read_text(encoding="utf-8")
    assert dumps_scenario(loads_scenario(text)) == text


def test_missing_matrix_entry_names_pair():
    line = "- {id: site0, label: only-region}\n"
    text = MINIMAL.replace(line, line + "- {id: site1, label: extra}\n")
    with pytest.raises(ScenarioError, match=r"location='loc0', site='site1'"):
        loads_scenario(text)


def test_missing_matrix_row():
    text = MINIMAL.replace("  loc0: [0.5]\n", "  other: [0.5]\n")
    with pytest.raises(ScenarioError, match="no row for location 'loc0'"):
        loads_scenario(text)


@pytest.mark.parametrize("old,new,pattern", [
    ("size: 2.0", "size: -2.0", "size must be"),
    ("location: loc0, size", "location: nowhere, size", "unknown location"),
    ("bodt-scenario v1", "bodt-scenario v9", "unsupported format"),
    ("compute_rate: 1.0", "compute_rate: fast", "compute_rate must be a number"),
    ("loc0: [0.5]", "loc0: [0.5, 0.7]", "has 2 entries"),
    ("time: seconds", "time: minutes", "units must be"),
])
def test_semantic_errors(old, new, pattern):
    assert old in MINIMAL
    with pytest.raises(ScenarioError, match=pattern):
        loads_scenario(MINIMAL.replace(old, new))


def test_parse_error_has_position():
    text = MINIMAL.replace("- {id: t0, location: loc0, size: 2.0}", "- {id: t0, location: [loc0, size: 2.0}")
    with pytest.raises(ScenarioParseError) as info:
        loads_scenario(text)
    assert info.value.line == 11 and info.value.column is not None
    assert "line 11" in str(info.value)


def test_not_a_mapping():
    with pytest.raises(ScenarioError):
        loads_scenario("- just\n- a list\n")


def test_round_trip_and_byte_identical(tmp_path, small):
    a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
    save_scenario(small, a)
    save_scenario(load_scenario(a), b)
    assert load_scenario(a) == small
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores file permissions")
def test_read_only_target(tmp_path, small):
    tmp_path.chmod(0o500)
    try:
        with pytest.raises(OSError):
            save_scenario(small, tmp_path / "x.yaml")
    finally:
        tmp_path.chmod(0o700)


def test_unwritable_target(tmp_path, small):
    # a directory in place of the file fails for every user
    with pytest.raises(OSError):
        save_scenario(small, tmp_path)


@given(s=scenarios())
def test_round_trip_property(s):
    assert loads_scenario(dumps_scenario(s)) == s


def test_generator_deterministic():
    spec = GeneratorSpec(n_locations=9, n_sites=3, n_tasks=40, seed=5)
    assert generate_scenario(spec) == generate_scenario(spec)
    assert generate_scenario(spec) != generate_scenario(GeneratorSpec(9, 3, 40, seed=6))


def test_generator_default_shape(large):
    s = generate_scenario(GeneratorSpec(seed=0))
    assert (len(s.locations), len(s.sites), len(s.tasks)) == (47, 8, 3290)
    assert s == large


def test_generator_single_site():
    s = generate_scenario(GeneratorSpec(n_locations=4, n_sites=1, n_tasks=10))
    assert nearest_plan(s).active_sites == (s.sites[0].id,)


def test_generator_locations_near_distinct_homes():
    s = generate_scenario(GeneratorSpec(n_locations=24, n_sites=8, n_tasks=50, seed=1))
    nearest = np.argmin(s.arrays.rate, axis=1)
    assert len(set(nearest.tolist())) == 8


@pytest.mark.parametrize("kwargs", [
    {"n_sites": 0}, {"n_tasks": 0}, {"n_locations": 0},
    {"size_range": (0.0, 1.0)}, {"size_range": (2.0, 1.0)},
    {"transfer_range": (-1.0, 1.0)}, {"jitter": 1.0},
])
def test_generator_rejects_bad_spec(kwargs):
    with pytest.raises(ValueError):
        generate_scenario(GeneratorSpec(**kwargs))


@given(seed=st.integers(0, 2**31), n_sites=st.integers(1, 6), n_loc=st.integers(1, 10))
def test_generated_scenarios_validate(seed, n_sites, n_loc):
    s = generate_scenario(GeneratorSpec(n_locations=n_loc, n_sites=n_sites, n_tasks=15, seed=seed))
    assert loads_scenario(dumps_scenario(s)) == s
    assert all(t.size > 0 for t in s.tasks)
