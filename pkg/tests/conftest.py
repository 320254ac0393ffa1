import functools

import numpy as np
import pytest

from bensonvs.driver import RunConfig, run
from bensonvs.instances import TrussParams, make_disk, make_ellipsoid, make_truss

ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    """Print and remember one verdict line, then fail the test if needed."""
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_run(instance: str, epsilon: float, mode: str = "vs", a: float = 7.0, nonneg: bool = False, audit: bool = False):
    if instance == "disk":
        vcp = make_disk()
    elif instance == "ellipsoid":
        vcp = make_ellipsoid(a)
    elif instance == "truss":
        vcp = make_truss(TrussParams(nonneg_loads=nonneg))
    else:
        raise ValueError(instance)
    cfg = RunConfig(epsilon=epsilon, mode=mode, max_iter=2000, audit_skips=audit, jobs=4)
    return vcp, run(vcp, cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
