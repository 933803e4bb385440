import numpy as np
import pytest

import fracground as fg

ACCEPTANCE_RESULTS = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
    assert passed, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def line_grid():
    return fg.build_grid(fg.Ball((0.0,), 1.0), 0.1)


@pytest.fixture(scope="session")
def line_weights(line_grid):
    return fg.build_pair_weights(line_grid, 2.0, 0.25)


@pytest.fixture(scope="session")
def line_weights_p3(line_grid):
    return fg.build_pair_weights(line_grid, 3.0, 0.2)


@pytest.fixture(scope="session")
def disk_grid():
    return fg.build_grid(fg.Ball((0.0, 0.0), 1.0), 0.21)


@pytest.fixture(scope="session")
def disk_weights(disk_grid):
    return fg.build_pair_weights(disk_grid, 2.0, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_field(grid, rng, positive=False):
    vals = rng.standard_normal(grid.n_interior)
    if positive:
        vals = np.abs(vals) + 0.1
    return fg.from_interior(grid, vals)


@pytest.fixture
def rand_line_field(line_grid, rng):
    return random_field(line_grid, rng)
