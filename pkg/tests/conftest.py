import numpy as np
import pytest

from chainkit.core import PointSet

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[num] = (title, "PASS" if call.excinfo is None else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {status}  {title}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_points(seed: int, k: int, d: int, scale: float = 1.0) -> PointSet:
    r = np.random.default_rng(seed)
    return PointSet(r.normal(size=(k, d)) * scale)
