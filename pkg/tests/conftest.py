import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pca_index import Dataset, Indicator, IndicatorSchema  # noqa: E402


def make_schema(n, pillars=("P",), directions=None):
    """n indicators spread round-robin-in-blocks over the given pillars."""
    per = -(-n // len(pillars))
    entries = []
    for i in range(n):
        d = directions[i] if directions else "increasing"
        entries.append(Indicator(f"c{i + 1}", pillars[min(i // per, len(pillars) - 1)], d))
    return IndicatorSchema.from_entries(entries)


def make_dataset(raw, schema=None, ids=None):
    n, m = len(raw), len(raw[0])
    schema = schema or make_schema(n)
    ids = ids or tuple(f"e{j + 1:04d}" for j in range(m))
    return Dataset(tuple(ids), schema.codes, tuple(tuple(float(v) for v in r) for r in raw)), schema


def random_raw(rng: random.Random, n, m):
    # a shared factor gives realistic correlation between indicators
    f = [rng.gauss(0, 1) for _ in range(m)]
    out = []
    for _ in range(n):
        a = rng.uniform(-1, 1)
        scale = 10 ** rng.uniform(-2, 3)
        out.append([scale * (a * f[j] + rng.gauss(0, 1)) for j in range(m)])
    return out


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_bytes(text.encode("utf-8"))
        return str(p)

    return _write


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        _ACCEPTANCE.append((number, title, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_ACCEPTANCE, key=lambda r: str(r[0])):
        terminalreporter.write_line(f"{status}  criterion {number}: {title}")
