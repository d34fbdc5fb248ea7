from pathlib import Path

import pytest

from qlogismos import build_graph, load_instance

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "qlogismos" / "fixtures"

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_ROWS: list = []


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / f"{name}.json"


@pytest.fixture
def single_column_graph():
    return build_graph(load_instance(FIXTURES / "single_column.json"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_ROWS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_ROWS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
