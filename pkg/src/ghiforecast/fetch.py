"""Download SURFRAD daily files into a local cache.

Cache layout mirrors ``<cache_root>/<station>/<year>/<file>``, the layout
``surfrad.load_station`` reads. Downloads go to a temporary file in the
target directory and are renamed into place, so an interrupted fetch never
leaves a truncated daily file behind. ``index.json`` in the cache root keeps
the size and SHA-256 of each fetched file; a cached file is skipped only
when both still match.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
import os
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import NetworkError
from .surfrad import daily_filename, resolve_station

log = logging.getLogger(__name__)

CACHE_ENV = "GHIFORECAST_CACHE"
BASE_URL = "https://gml.noaa.gov/aftp/data/radiation/surfrad"
INDEX_NAME = "index.json"
TIMEOUT_S = 60


def default_cache_root() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ghiforecast"


def file_url(station: str, year: int, name: str, base_url: str = BASE_URL) -> str:
    _, info = resolve_station(station)
    return f"{base_url}/{info.archive_dir}/{year}/{name}"


def days_of_year(year: int) -> range:
    n = (_dt.date(year + 1, 1, 1) - _dt.date(year, 1, 1)).days
    return range(1, n + 1)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class CacheIndex:
    path: Path
    entries: dict = field(default_factory=dict)  # relative path -> {"size", "sha256"}

    @classmethod
    def load(cls, root: Path) -> "CacheIndex":
        path = root / INDEX_NAME
        if path.exists():
            try:
                return cls(path, json.loads(path.read_text()))
            except (OSError, ValueError):
                log.warning("ignoring unreadable cache index %s", path)
        return cls(path)

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self.entries, indent=1, sort_keys=True))
        os.replace(tmp, self.path)

    def is_valid(self, root: Path, rel: str) -> bool:
        entry = self.entries.get(rel)
        target = root / rel
        if entry is None or not target.exists():
            return False
        return target.stat().st_size == entry["size"] and _sha256(target) == entry["sha256"]

    def add(self, root: Path, rel: str) -> None:
        target = root / rel
        self.entries[rel] = {"size": target.stat().st_size, "sha256": _sha256(target)}


def _download(opener, url: str, dest: Path) -> None:
    dest.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=".part-")
    try:
        with os.fdopen(fd, "wb") as out, opener(url, timeout=TIMEOUT_S) as resp:
            while True:
                chunk = resp.read(1 << 16)
                if not chunk:
                    break
                out.write(chunk)
        os.replace(tmp, dest)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


@dataclass
class FetchResult:
    paths: list[Path]
    downloaded: list[Path]
    skipped: list[Path]


def fetch(
    stations: Iterable[str],
    years: Iterable[int],
    cache_root=None,
    *,
    offline: bool = False,
    days: Callable[[int], Iterable[int]] = days_of_year,
    opener: Callable | None = None,
    base_url: str = BASE_URL,
) -> FetchResult:
    """Make every requested daily file available in the cache.

    Offline, nothing is downloaded and any file missing from the cache is an
    error. Online, per-file failures are collected and raised together as a
    NetworkError after the remaining files have been tried.
    """
    root = Path(cache_root) if cache_root is not None else default_cache_root()
    opener = opener or urllib.request.urlopen
    index = CacheIndex.load(root)
    paths, downloaded, skipped = [], [], []
    failures: dict[str, str] = {}
    try:
        for station in stations:
            key, info = resolve_station(station)
            for year in years:
                for jday in days(year):
                    name = daily_filename(info.prefix, year, jday)
                    rel = f"{key}/{year}/{name}"
                    target = root / rel
                    if index.is_valid(root, rel) or (offline and target.exists()):
                        paths.append(target)
                        skipped.append(target)
                        continue
                    if offline:
                        failures[rel] = "not cached (offline)"
                        continue
                    url = file_url(key, year, name, base_url)
                    try:
                        _download(opener, url, target)
                    except (urllib.error.URLError, OSError, TimeoutError) as exc:
                        failures[rel] = f"{url}: {exc}"
                        continue
                    index.add(root, rel)
                    paths.append(target)
                    downloaded.append(target)
    finally:
        if downloaded:
            index.save()
    if failures:
        raise NetworkError(failures)
    return FetchResult(paths, downloaded, skipped)
