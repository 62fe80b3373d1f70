from __future__ import annotations

import pytest
from hypothesis import settings

import qdipole as q

settings.register_profile("suite", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def even2() -> q.ExactMatrixSet:
    return q.assemble("even", 2)


@pytest.fixture(scope="session")
def even4() -> q.ExactMatrixSet:
    return q.assemble("even", 4)


@pytest.fixture(scope="session")
def even6() -> q.ExactMatrixSet:
    return q.assemble("even", 6)


@pytest.fixture(scope="session")
def odd4() -> q.ExactMatrixSet:
    return q.assemble("odd", 4)


@pytest.fixture(scope="session")
def odd6() -> q.ExactMatrixSet:
    return q.assemble("odd", 6)


@pytest.fixture(scope="session")
def even4_ground(even4) -> q.OptResult:
    return q.optimize_alpha_auto(even4, 1)


@pytest.fixture(scope="session")
def odd4_ground(odd4) -> q.OptResult:
    return q.optimize_alpha_auto(odd4, 1)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one line per acceptance criterion checked during the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.getreports(outcome):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    status = "PASS" if outcome == "passed" else "FAIL"
                    lines.append(f"{status}  {value}")
    for rep in terminalreporter.getreports("skipped"):
        for name, value in getattr(rep, "user_properties", []):
            if name == "acceptance":
                lines.append(f"SKIP  {value}")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split(None, 1)[1]):
            terminalreporter.write_line(line)
