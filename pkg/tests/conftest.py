import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CONFIG_DIR = Path(__file__).parent.parent / "configs"
GOLDEN_DIR = Path(__file__).parent / "goldens"

ACCEPTANCE_LINES = []


def record_criterion(number, label, outcome):
    ACCEPTANCE_LINES.append((number, f"criterion {number}: {outcome} - {label}"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def _run_config(name):
    from sgprecond.config import load_config
    from sgprecond.experiments import run_verify

    return run_verify(load_config(CONFIG_DIR / name))


@pytest.fixture(scope="session")
def table3_results():
    return {setting: _run_config(f"table3_setting{setting}.cfg") for setting in (1, 2, 3)}


@pytest.fixture(scope="session")
def table4_result():
    return _run_config("table4.cfg")


@pytest.fixture(scope="session")
def table5_result():
    from sgprecond.experiments import ResultTable

    merged = ResultTable()
    for k in range(1, 8):
        table = _run_config(f"table5_K{k}.cfg")
        assert len(table.rows) == 1
        merged.add_row(table.rows[0])
    return merged
