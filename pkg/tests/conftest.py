"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from cinescript.script_ir import parse_script

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by this test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = getattr(report, "criterion", (None, None)) or (None, None)
    if number is None:
        return
    entry = _criteria.setdefault(number, {"title": title, "passed": True})
    entry["passed"] = entry["passed"] and report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


@pytest.fixture
def load_fixture():
    def load(name: str):
        return parse_script((FIXTURES / name).read_text(encoding="utf-8"))

    return load


@pytest.fixture
def fixture_doc():
    return lambda name: json.loads((FIXTURES / name).read_text(encoding="utf-8"))
