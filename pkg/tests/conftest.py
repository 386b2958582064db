import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from bodt.workload import load_scenario

DATA = Path(__file__).resolve().parents[1] / "src" / "bodt" / "data"
FIXTURES = ("minimal.yaml", "small.yaml", "large.yaml")

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def small():
    return load_scenario(DATA / "small.yaml")


@pytest.fixture(scope="session")
def large():
    return load_scenario(DATA / "large.yaml")


_acceptance: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _acceptance.append((props["criterion"], "PASS" if report.passed else "FAIL",
                            props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in sorted(_acceptance, key=lambda r: int(r[0].split(".")[0])):
        line = f"{verdict}  {name}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
