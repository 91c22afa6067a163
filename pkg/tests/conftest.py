import numpy as np
import pytest

from varbesov.filterbank import build_filterbank
from varbesov.grid import Grid

# criterion -> [(part, passed, detail)], filled by the acceptance tests
ACCEPTANCE = {}


def record(criterion: int, title: str, part: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, (title, []))[1].append((part, bool(passed), detail))


@pytest.fixture(scope="session")
def desk_grid():
    return Grid(1, 4, 8)


@pytest.fixture(scope="session")
def desk_bank(desk_grid):
    return build_filterbank(desk_grid)


@pytest.fixture(scope="session")
def unit_grid():
    # box [0, 1) with 2^10 samples
    return Grid(1, 0, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, parts = ACCEPTANCE[k]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {k}: {title}")
        for part, ok, detail in parts:
            terminalreporter.write_line(f"        {'ok  ' if ok else 'FAIL'} {part}" + (f" ({detail})" if detail else ""))
