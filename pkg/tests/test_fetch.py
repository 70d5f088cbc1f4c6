import io
import os
import urllib.error

import pytest

from ghiforecast import fetch as F
from ghiforecast.errors import NetworkError
from ghiforecast.surfrad import load_station


class FakeServer:
    """Stands in for urlopen; serves ``files`` by URL and counts requests."""

    def __init__(self, files, fail_after=None):
        self.files = files
        self.calls = []
        self.fail_after = fail_after

    def __call__(self, url, timeout=None):
        self.calls.append(url)
        if url not in self.files:
            raise urllib.error.HTTPError(url, 404, "not found", None, None)
        body = self.files[url]
        if self.fail_after is not None:
            return _Broken(body[: self.fail_after])
        return io.BytesIO(body)


class _Broken(io.BytesIO):
    def read(self, n=-1):
        chunk = super().read(n)
        if not chunk:
            raise ConnectionResetError("connection dropped")
        return chunk


def _days(year):
    return [121, 122]


@pytest.fixture
def server(fixtures_dir):
    body = (fixtures_dir / "bon19121.dat").read_bytes()
    files = {}
    for jday in (121, 122):
        name = f"bon19{jday:03d}.dat"
        files[F.file_url("bondville", 2019, name)] = body.replace(b"2019 121", f"2019 {jday}".encode())
    return FakeServer(files)


def test_url_template():
    url = F.file_url("bondville", 2019, "bon19121.dat")
    assert url == f"{F.BASE_URL}/Bondville_IL/2019/bon19121.dat"


def test_days_of_year():
    assert len(F.days_of_year(2020)) == 366
    assert len(F.days_of_year(2019)) == 365


def test_cache_root_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv(F.CACHE_ENV, str(tmp_path))
    assert F.default_cache_root() == tmp_path
    monkeypatch.delenv(F.CACHE_ENV)
    assert F.default_cache_root().name == "ghiforecast"


def test_fetch_downloads_then_skips(tmp_path, server):
    res = F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    assert len(res.downloaded) == 2 and not res.skipped
    assert (tmp_path / F.INDEX_NAME).exists()
    again = F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    assert len(again.skipped) == 2 and not again.downloaded
    assert len(server.calls) == 2
    # the cache is laid out the way the loader expects
    assert len(load_station(tmp_path, "bondville", [2019])) == 10


def test_corrupted_file_is_refetched(tmp_path, server):
    res = F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    good = res.paths[0].read_bytes()
    res.paths[0].write_bytes(good[:-10])
    again = F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    assert again.downloaded == [res.paths[0]]
    assert res.paths[0].read_bytes() == good


def test_offline_warm_cache(tmp_path, server):
    F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    res = F.fetch(["bondville"], [2019], tmp_path, offline=True, days=_days, opener=server)
    assert len(res.paths) == 2 and len(server.calls) == 2


def test_offline_cold_cache(tmp_path, server):
    with pytest.raises(NetworkError) as info:
        F.fetch(["bondville"], [2019], tmp_path, offline=True, days=_days, opener=server)
    assert all(v == "not cached (offline)" for v in info.value.failures.values())
    assert server.calls == []


def test_missing_files_reported_together(tmp_path, server):
    with pytest.raises(NetworkError) as info:
        F.fetch(["bondville"], [2019], tmp_path, days=lambda y: [121, 122, 123], opener=server)
    assert list(info.value.failures) == ["bondville/2019/bon19123.dat"]
    # the files that did arrive are kept and indexed
    assert len(F.CacheIndex.load(tmp_path).entries) == 2


def test_interrupted_download_leaves_nothing(tmp_path, fixtures_dir):
    url = F.file_url("bondville", 2019, "bon19121.dat")
    broken = FakeServer({url: (fixtures_dir / "bon19121.dat").read_bytes()}, fail_after=100)
    with pytest.raises(NetworkError):
        F.fetch(["bondville"], [2019], tmp_path, days=lambda y: [121], opener=broken)
    year_dir = tmp_path / "bondville" / "2019"
    assert list(year_dir.iterdir()) == []


def test_unreadable_index_is_ignored(tmp_path, server):
    tmp_path.joinpath(F.INDEX_NAME).write_text("{not json")
    res = F.fetch(["bondville"], [2019], tmp_path, days=_days, opener=server)
    assert len(res.downloaded) == 2


@pytest.mark.network
@pytest.mark.skipif(os.environ.get("GHIFORECAST_NETWORK") != "1", reason="set GHIFORECAST_NETWORK=1 to hit the live archive")
def test_real_archive_single_day(tmp_path):
    try:
        res = F.fetch(["bondville"], [2019], tmp_path, days=lambda y: [121])
    except NetworkError as exc:
        pytest.skip(f"network unavailable: {exc}")
    assert len(load_station(tmp_path, "bondville", [2019])) > 1000
    assert res.downloaded
