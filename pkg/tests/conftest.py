import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from ghiforecast import synthetic
from ghiforecast.preprocess import Frame
from ghiforecast.surfrad import write_daily_files

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def synthetic_archive(tmp_path_factory):
    """The full three-station synthetic archive (30 days per station)."""
    root = tmp_path_factory.mktemp("synthetic")
    return synthetic.build_archive(root)


@pytest.fixture(scope="session")
def mini_archive(tmp_path_factory):
    """Two training days per year plus one validation day, bondville and pennstate."""
    root = tmp_path_factory.mktemp("mini")
    for i, station in enumerate(("bondville", "pennstate")):
        for year, days in ((2018, 2), (2019, 2), (2020, 1)):
            ds = synthetic.gen_synthetic(7 + i, days, station, start=dt.date(year, 5, 1), sentinel_rate=0.002)
            write_daily_files(ds, root, station)
    return root


def random_frame(rng, n, p, noise=1.0):
    X = rng.normal(size=(n, p))
    y = X @ rng.normal(size=p) + noise * rng.normal(size=n)
    keys = np.datetime64("2019-05-01T07:00") + np.arange(n).astype("timedelta64[m]")
    return Frame(tuple(f"x{j}" for j in range(p)), X, y, keys)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
