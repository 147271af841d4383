from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from holimeter.household import generate_synthetic_day  # noqa: E402
from holimeter.shaper import case_problem, run_case  # noqa: E402
from holimeter.storage import default_battery, default_tank  # noqa: E402

DEFAULT_SEED = 0


@pytest.fixture(scope="session")
def household():
    """The default synthetic household with the default battery and tank."""
    return generate_synthetic_day(DEFAULT_SEED).with_storage(default_battery(), default_tank())


class _Cases:
    """Lazily solved cases on the default household, shared by all tests."""

    def __init__(self, h):
        self.h = h
        self._sol = {}

    def __getitem__(self, case):
        if case not in self._sol:
            self._sol[case] = run_case(case, self.h)
        return self._sol[case]

    def problem(self, case):
        return case_problem(case, self.h)


@pytest.fixture(scope="session")
def cases(household):
    return _Cases(household)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: solves the full-day default cases")


def pytest_collection_modifyitems(items):
    for item in items:
        if "cases" in getattr(item, "fixturenames", ()) or item.module.__name__ == "test_acceptance":
            item.add_marker(pytest.mark.slow)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
