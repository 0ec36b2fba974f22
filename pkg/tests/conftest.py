import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def record(label: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class TimedSamples(list):
    elapsed: float = 0.0


@pytest.fixture(scope="session")
def gue_samples_200():
    """10^4 seeded dense GUE spectra at n = 200 (about 100 s, shared).

    ``.elapsed`` holds the sampling wall time so runtime budgets can include it.
    """
    from airygap.rmt_montecarlo import sample_gue_batch

    t0 = time.perf_counter()
    out = TimedSamples(sample_gue_batch(200, 10_000, seed=0, method="dense"))
    out.elapsed = time.perf_counter() - t0
    return out
