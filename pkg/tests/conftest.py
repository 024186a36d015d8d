import numpy as np
import pytest
from hypothesis import settings

from spectralfield import PolyMatrixField, builtin_field

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def cubic():
    return builtin_field("cubic")


@pytest.fixture(scope="session")
def quartic():
    return builtin_field("quartic")


@pytest.fixture(scope="session")
def const_diag12():
    return PolyMatrixField.constant(np.diag([1.0, 2.0]), n=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one summary line per acceptance criterion

_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.nodeid.startswith("tests/test_acceptance.py::test_criterion_"):
            doc = (item.function.__doc__ or "").strip().splitlines()
            _CRITERIA[item.nodeid] = {"title": doc[0] if doc else item.name, "outcome": "NOT RUN"}


def pytest_runtest_logreport(report):
    entry = _CRITERIA.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call" or report.outcome != "passed":
        entry["outcome"] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, entry in _CRITERIA.items():
        number = nodeid.rsplit("_", 1)[-1].split("[")[0]
        terminalreporter.write_line(f"criterion {int(number):2d}: {entry['outcome']:<7} {entry['title']}")


def pytest_deselected(items):
    for item in items:
        _CRITERIA.pop(item.nodeid, None)
