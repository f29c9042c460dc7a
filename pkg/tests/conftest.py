import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasiwalk.imaging import ImageBuffer


def random_image(m, n, seed):
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, size=(m, n, 3), dtype=np.uint8))


@pytest.fixture
def noise():
    return random_image


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    results = item.config.stash.setdefault(_RESULTS, {})
    ok = call.excinfo is None
    results[n] = (title, ok and results.get(n, (title, True))[1])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}")


_RESULTS = pytest.StashKey[dict]()
