import functools

import numpy as np
import pytest

from nutaxis import MonitorConfig, SolverParams, build_initial, get_fixture, make_grid, simulate

E2 = np.exp(2.0)


def logistic(t, a=1.0, b=1.0):
    """Closed-form solution of u' = u v, v' = -u v with u(0) = a, v(0) = b."""
    s0 = a + b
    v = s0 * b / (b + a * np.exp(s0 * t))
    return s0 - v, v


@functools.lru_cache(maxsize=None)
def fixture_run(name, eps, dx=1 / 32, T=1.0, sample_interval=0.05, dt_max=1e-2):
    n = int(round(2 / (eps * dx)))
    init = build_initial(get_fixture(name), make_grid(eps, n))
    return simulate(init, SolverParams(dt_max=dt_max), T, monitors=MonitorConfig(sample_interval=sample_interval))


@pytest.fixture(scope="session")
def run():
    return fixture_run


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
