import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from expmid import TimeGrid, build_report, run
from expmid.cli import RunConfig, run_suite

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_suite(example, steps=None, phi_method="spectral"):
    return run_suite(RunConfig(example=example, steps=steps, phi_method=phi_method))


@functools.lru_cache(maxsize=None)
def cached_run(example, N):
    from expmid import EXAMPLES
    p = EXAMPLES[example]()
    tr = run(p, TimeGrid.uniform(N))
    return p, tr, build_report(tr, p)


@pytest.fixture
def suite():
    return cached_suite


@pytest.fixture
def example_run():
    return cached_run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
