"""Reader and writer for SURFRAD daily station files.

A daily file has two header lines (station name; latitude, longitude and
elevation) followed by one whitespace-delimited row per minute::

    year jday month day hour min dt zen dw_solar qc uw_solar qc ... pressure qc

Missing measurements are printed as -9999.9 and are kept verbatim here;
dropping them is the job of :func:`ghiforecast.preprocess.clean`.
"""
from __future__ import annotations

import datetime as _dt
import gzip
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BadNumber, DuplicateTimestamp, MalformedHeader, MissingData, RowArity, UnknownStation

SENTINEL = -9999.9
SENTINEL_THRESHOLD = -9000.0

TIME_FIELDS = ("year", "jday", "month", "day", "hour", "minute")
LEADING_FIELDS = ("dt", "zen")
MEASURED_FIELDS = (
    "dw_solar",
    "uw_solar",
    "direct_n",
    "diffuse",
    "dw_ir",
    "dw_casetemp",
    "dw_dometemp",
    "uw_ir",
    "uw_casetemp",
    "uw_dometemp",
    "uvb",
    "par",
    "netsolar",
    "netir",
    "totalnet",
    "temp",
    "rh",
    "windspd",
    "winddir",
    "pressure",
)
VALUE_FIELDS = LEADING_FIELDS + MEASURED_FIELDS

# printed precision of each real-valued column in the archive files
DECIMALS: dict[str, int] = {name: 1 for name in MEASURED_FIELDS}
DECIMALS.update(
    dt=3,
    zen=2,
    dw_casetemp=2,
    dw_dometemp=2,
    uw_casetemp=2,
    uw_dometemp=2,
)


def is_sentinel(values):
    """True where a value is the missing-data placeholder (or any value <= -9000)."""
    return np.asarray(values) <= SENTINEL_THRESHOLD


@dataclass(frozen=True)
class Station:
    name: str
    prefix: str
    archive_dir: str
    latitude: float
    longitude: float
    elevation: float
    utc_offset: int  # local standard time minus UTC, hours


STATIONS: dict[str, Station] = {
    "bondville": Station("Bondville", "bon", "Bondville_IL", 40.05, -88.37, 213.0, -6),
    "desertrock": Station("Desert Rock", "dra", "Desert_Rock_NV", 36.62, -116.02, 1007.0, -8),
    "pennstate": Station("Penn State", "psu", "Penn_State_PA", 40.72, -77.93, 376.0, -5),
}


def resolve_station(station: str) -> tuple[str, Station]:
    """Accept a registry key (``bondville``) or a file prefix (``bon``)."""
    key = station.lower()
    if key in STATIONS:
        return key, STATIONS[key]
    for name, info in STATIONS.items():
        if info.prefix == key:
            return name, info
    raise UnknownStation(f"unknown SURFRAD station {station!r}; choose one of {', '.join(STATIONS)}")


@dataclass(frozen=True)
class StationMeta:
    name: str
    latitude: float
    longitude: float
    elevation: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise MalformedHeader(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise MalformedHeader(f"longitude out of range: {self.longitude}")


@dataclass(frozen=True)
class ColumnLayout:
    """Token order of a data row.

    ``qc=True`` is the archive layout: every measured value is followed by an
    integer QC flag. ``qc=False`` drops the flag columns (handy for
    hand-written fixtures); flags then read as 0.
    """

    measured: tuple[str, ...] = MEASURED_FIELDS
    qc: bool = True

    def __post_init__(self):
        if sorted(self.measured) != sorted(MEASURED_FIELDS):
            raise ValueError("layout must list every measured variable exactly once")

    @property
    def n_tokens(self) -> int:
        per = 2 if self.qc else 1
        return len(TIME_FIELDS) + len(LEADING_FIELDS) + per * len(self.measured)

    def column_names(self) -> list[str]:
        names = list(TIME_FIELDS) + list(LEADING_FIELDS)
        for m in self.measured:
            names.append(m)
            if self.qc:
                names.append("qc_" + m)
        return names


SURFRAD_LAYOUT = ColumnLayout()
NO_QC_LAYOUT = ColumnLayout(qc=False)


@dataclass(frozen=True, slots=True)
class Observation:
    """One minute of station data. Measured fields may hold the sentinel."""

    year: int
    jday: int
    month: int
    day: int
    hour: int
    minute: int
    dt: float
    zen: float
    dw_solar: float
    uw_solar: float
    direct_n: float
    diffuse: float
    dw_ir: float
    dw_casetemp: float
    dw_dometemp: float
    uw_ir: float
    uw_casetemp: float
    uw_dometemp: float
    uvb: float
    par: float
    netsolar: float
    netir: float
    totalnet: float
    temp: float
    rh: float
    windspd: float
    winddir: float
    pressure: float
    qc: Mapping[str, int] = field(default_factory=dict)

    @property
    def timestamp(self) -> _dt.datetime:
        base = _dt.datetime(self.year, 1, 1) + _dt.timedelta(days=self.jday - 1)
        return base.replace(hour=self.hour, minute=self.minute)


def _epoch_minutes(year, jday, hour, minute) -> np.ndarray:
    year = np.asarray(year, dtype=np.int64)
    days = (year - 1970).astype("datetime64[Y]").astype("datetime64[D]").astype(np.int64)
    days = days + np.asarray(jday, dtype=np.int64) - 1
    return days * 1440 + np.asarray(hour, dtype=np.int64) * 60 + np.asarray(minute, dtype=np.int64)


class StationDataset:
    """Column-oriented, immutable collection of observations sorted by time.

    Indexing and iteration yield :class:`Observation` instances; the numpy
    columns are available through :meth:`column` for vectorised work.
    """

    def __init__(self, meta: StationMeta, columns: Mapping[str, np.ndarray], *, check=True):
        cols = {}
        for name in TIME_FIELDS:
            cols[name] = np.asarray(columns[name], dtype=np.int64)
        for name in VALUE_FIELDS:
            cols[name] = np.asarray(columns[name], dtype=np.float64)
        for name in MEASURED_FIELDS:
            q = columns.get("qc_" + name)
            n = len(cols["year"])
            cols["qc_" + name] = np.zeros(n, np.int64) if q is None else np.asarray(q, np.int64)
        cols["ts"] = _epoch_minutes(cols["year"], cols["jday"], cols["hour"], cols["minute"])
        for arr in cols.values():
            arr.setflags(write=False)
        if check and len(cols["ts"]) > 1 and np.any(np.diff(cols["ts"]) <= 0):
            raise DuplicateTimestamp("timestamps must be strictly increasing")
        self.meta = meta
        self._cols = cols

    @classmethod
    def from_observations(cls, meta: StationMeta, rows: Sequence[Observation]):
        cols: dict[str, list] = {name: [] for name in TIME_FIELDS + VALUE_FIELDS}
        for name in MEASURED_FIELDS:
            cols["qc_" + name] = []
        for obs in rows:
            for name in TIME_FIELDS + VALUE_FIELDS:
                cols[name].append(getattr(obs, name))
            for name in MEASURED_FIELDS:
                cols["qc_" + name].append(obs.qc.get(name, 0))
        return cls(meta, {k: np.array(v) for k, v in cols.items()})

    def __len__(self) -> int:
        return len(self._cols["ts"])

    def column(self, name: str) -> np.ndarray:
        return self._cols[name]

    @property
    def columns(self) -> Mapping[str, np.ndarray]:
        return dict(self._cols)

    @property
    def timestamps(self) -> np.ndarray:
        return self._cols["ts"].astype("datetime64[m]")

    def __getitem__(self, i: int) -> Observation:
        c = self._cols
        kw = {name: int(c[name][i]) for name in TIME_FIELDS}
        kw.update({name: float(c[name][i]) for name in VALUE_FIELDS})
        kw["qc"] = {name: int(c["qc_" + name][i]) for name in MEASURED_FIELDS}
        return Observation(**kw)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def rows(self) -> list[Observation]:
        return list(self)

    def select(self, mask_or_index) -> "StationDataset":
        """Subset rows by boolean mask or increasing integer index."""
        sub = {k: v[mask_or_index] for k, v in self._cols.items() if k != "ts"}
        return StationDataset(self.meta, sub, check=False)

    def equals(self, other: "StationDataset") -> bool:
        if self.meta != other.meta or len(self) != len(other):
            return False
        return all(np.array_equal(v, other._cols[k]) for k, v in self._cols.items())

    def __repr__(self) -> str:
        return f"StationDataset({self.meta.name!r}, rows={len(self)})"


def concat(meta: StationMeta, parts: Iterable[StationDataset]) -> StationDataset:
    """Merge datasets, sort by time and reject duplicate minutes."""
    parts = [p for p in parts if len(p)]
    if not parts:
        return empty_dataset(meta)
    keys = [k for k in parts[0]._cols if k != "ts"]
    merged = {k: np.concatenate([p._cols[k] for p in parts]) for k in keys}
    ts = np.concatenate([p._cols["ts"] for p in parts])
    order = np.argsort(ts, kind="stable")
    ts = ts[order]
    dup = np.flatnonzero(np.diff(ts) == 0)
    if dup.size:
        when = ts[dup[0]].astype("datetime64[m]")
        raise DuplicateTimestamp(f"{meta.name}: minute {when} appears more than once")
    return StationDataset(meta, {k: v[order] for k, v in merged.items()}, check=False)


def empty_dataset(meta: StationMeta) -> StationDataset:
    cols = {name: np.zeros(0) for name in TIME_FIELDS + VALUE_FIELDS}
    return StationDataset(meta, cols)


# --- parsing ------------------------------------------------------------------

_NUMERIC = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def parse_header(line1: str, line2: str) -> StationMeta:
    name = line1.strip()
    if not name:
        raise MalformedHeader("empty station name line")
    tokens = line2.split()[:3]
    if len(tokens) < 3 or not all(_NUMERIC.match(t) for t in tokens):
        raise MalformedHeader(f"expected latitude, longitude, elevation in {line2!r}")
    lat, lon, elev = (float(t) for t in tokens)
    return StationMeta(name=name, latitude=lat, longitude=lon, elevation=elev)


def parse_columns(body: str, layout: ColumnLayout = SURFRAD_LAYOUT, first_line_no: int = 1):
    """Parse a data block into a dict of numpy columns (layout order)."""
    expected = layout.n_tokens
    flat: list[str] = []
    line_nos: list[int] = []
    for offset, line in enumerate(body.splitlines()):
        toks = line.split()
        if not toks:
            continue
        if len(toks) != expected:
            raise RowArity(first_line_no + offset, expected, len(toks))
        flat.extend(toks)
        line_nos.append(first_line_no + offset)
    names = layout.column_names()
    if not flat:
        return {name: np.zeros(0) for name in names}
    try:
        table = np.array(flat, dtype=np.float64).reshape(-1, expected)
    except ValueError:
        for pos, tok in enumerate(flat):
            try:
                float(tok)
            except ValueError:
                raise BadNumber(line_nos[pos // expected], pos % expected + 1, tok) from None
        raise
    if not np.all(np.isfinite(table)):
        row, col = np.argwhere(~np.isfinite(table))[0]
        raise BadNumber(line_nos[row], int(col) + 1, flat[row * expected + col])
    return {name: table[:, j] for j, name in enumerate(names)}


def parse_rows(body: str, layout: ColumnLayout = SURFRAD_LAYOUT) -> list[Observation]:
    cols = parse_columns(body, layout)
    meta = StationMeta("", 0.0, 0.0, 0.0)
    return StationDataset(meta, cols, check=False).rows


def read_text(path: Path) -> str:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="ascii") as fh:
            return fh.read()
    return path.read_text(encoding="ascii")


def parse_file(path: Path, layout: ColumnLayout = SURFRAD_LAYOUT) -> StationDataset:
    text = read_text(path)
    head, _, rest = text.partition("\n")
    line2, _, body = rest.partition("\n")
    meta = parse_header(head, line2)
    return StationDataset(meta, parse_columns(body, layout, first_line_no=3), check=False)


_FILE_RE = re.compile(r"^([a-z]{3})(\d{2})(\d{3})\.dat(\.gz)?$")


def daily_filename(prefix: str, year: int, jday: int) -> str:
    return f"{prefix}{year % 100:02d}{jday:03d}.dat"


def find_files(root: Path, station: str, years: Iterable[int]) -> dict[int, list[Path]]:
    """Locate daily files for ``station`` anywhere beneath ``root``."""
    _, info = resolve_station(station)
    wanted = {int(y) % 100: int(y) for y in years}
    found: dict[int, list[Path]] = {y: [] for y in wanted.values()}
    root = Path(root)
    if not root.is_dir():
        return found
    for path in root.rglob(f"{info.prefix}*.dat*"):
        m = _FILE_RE.match(path.name)
        if not m or m.group(1) != info.prefix:
            continue
        yy = int(m.group(2))
        if yy in wanted:
            found[wanted[yy]].append(path)
    for paths in found.values():
        paths.sort(key=lambda p: p.name)
    return found


def load_station(root, station: str, years: Iterable[int], layout: ColumnLayout = SURFRAD_LAYOUT) -> StationDataset:
    """Read all daily files of ``station`` for ``years`` into one dataset."""
    years = sorted({int(y) for y in years})
    found = find_files(Path(root), station, years)
    parts = []
    for year in years:
        if not found[year]:
            raise MissingData(station, year, f"searched {root}")
        parts.extend(parse_file(p, layout) for p in found[year])
    return concat(parts[0].meta, parts)


# --- writing ------------------------------------------------------------------


def _row_format(layout: ColumnLayout) -> str:
    parts = ["%4d", "%3d", "%2d", "%2d", "%2d", "%2d"]
    for name in LEADING_FIELDS:
        parts.append(f"%.{DECIMALS[name]}f")
    for name in layout.measured:
        parts.append(f"%.{DECIMALS[name]}f")
        if layout.qc:
            parts.append("%d")
    return " " + " ".join(parts)


def format_header(meta: StationMeta) -> str:
    return f" {meta.name}\n {meta.latitude:.2f} {meta.longitude:.2f} {meta.elevation:.0f} m version 1\n"


def format_rows(ds: StationDataset, layout: ColumnLayout = SURFRAD_LAYOUT) -> str:
    fmt = _row_format(layout)
    names = layout.column_names()
    if not len(ds):
        return ""
    table = np.column_stack([ds.column(n) for n in names])
    lines = []
    for row in table.tolist():
        lines.append(fmt % tuple(row))
    return "\n".join(lines) + "\n"


def write_daily_files(ds: StationDataset, root, station: str, layout: ColumnLayout = SURFRAD_LAYOUT) -> list[Path]:
    """Write ``ds`` as one file per day under ``root/<station>/<year>/``."""
    key, info = resolve_station(station)
    paths = []
    year = ds.column("year")
    jday = ds.column("jday")
    day_key = year * 1000 + jday
    for k in np.unique(day_key):
        sub = ds.select(np.flatnonzero(day_key == k))
        y, j = divmod(int(k), 1000)
        path = Path(root) / key / str(y) / daily_filename(info.prefix, y, j)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_header(ds.meta) + format_rows(sub, layout), encoding="ascii")
        paths.append(path)
    return paths
