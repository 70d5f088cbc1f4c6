"""Deterministic synthetic SURFRAD-like station data.

GHI is a clear-sky curve (Haurwitz model on the true solar zenith angle of
the station) scaled by a cloud index. The cloud index relaxes towards a
clear (~1) or overcast (~0.3) level, and which level applies is a steep
function of relative humidity, so next-minute GHI depends non-linearly on
the current humidity and zenith angle. Rare abrupt jumps and small Gaussian
innovations add the unpredictable part. The other variables are derived
from GHI, the cloud index and slow random walks.
"""
from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .surfrad import (
    DECIMALS,
    MEASURED_FIELDS,
    SENTINEL,
    STATIONS,
    StationDataset,
    StationMeta,
    resolve_station,
    write_daily_files,
)


@dataclass(frozen=True)
class Climate:
    jump_rate: float = 0.001  # per minute
    relax: float = 0.5
    noise: float = 0.004
    clear_level: float = 1.0
    cloudy_level: float = 0.2
    rh_offset: float = 0.0  # cloud onset, relative to mean_rh
    rh_width: float = 0.5
    albedo: float = 0.2
    mean_temp: float = 18.0
    temp_amplitude: float = 6.0
    mean_rh: float = 70.0


CLIMATES = {
    "bondville": Climate(),
    "desertrock": Climate(albedo=0.28, mean_temp=24.0, temp_amplitude=8.0, mean_rh=25.0, rh_offset=3.0, noise=0.003),
    "pennstate": Climate(mean_temp=15.0, mean_rh=75.0, rh_offset=-2.0, noise=0.005),
}

# days per year in the archive used by the test-suite and scripts
ARCHIVE_LAYOUT = {2018: 12, 2019: 12, 2020: 6}  # 30 days per station
ARCHIVE_START = (5, 1)  # month, day


def solar_zenith(lat, lon, utc_offset, doy, minute_of_day) -> np.ndarray:
    """Zenith angle (degrees) for clock times in local standard time."""
    gamma = 2 * np.pi * (np.asarray(doy) - 1) / 365.0
    decl = 0.006918 - 0.399912 * np.cos(gamma) + 0.070257 * np.sin(gamma) - 0.006758 * np.cos(2 * gamma) + 0.000907 * np.sin(2 * gamma)
    eqt = 229.18 * (0.000075 + 0.001868 * np.cos(gamma) - 0.032077 * np.sin(gamma) - 0.014615 * np.cos(2 * gamma) - 0.040849 * np.sin(2 * gamma))
    solar_min = np.asarray(minute_of_day) + eqt + 4.0 * lon - 60.0 * utc_offset
    hour_angle = np.radians(solar_min / 4.0 - 180.0)
    phi = np.radians(lat)
    cosz = np.sin(phi) * np.sin(decl) + np.cos(phi) * np.cos(decl) * np.cos(hour_angle)
    return np.degrees(np.arccos(np.clip(cosz, -1.0, 1.0)))


def _ar1(rng, n, phi, sigma):
    e = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = phi * acc + e[i]
        out[i] = acc
    return out


def _cloud_index(rng, rh, cl: Climate):
    """k[t] relaxes towards the level set by rh[t - 1]."""
    n = rh.shape[0]
    onset = cl.mean_rh + cl.rh_offset
    cloudy = 1.0 / (1.0 + np.exp(-(rh - onset) / cl.rh_width))
    level = cl.clear_level - (cl.clear_level - cl.cloudy_level) * cloudy
    k = np.empty(n)
    jumps = rng.random(n) < cl.jump_rate
    targets = rng.uniform(0.1, 1.05, n)
    eps = rng.normal(0.0, cl.noise, n)
    state = level[0]
    for i in range(n):
        if jumps[i]:
            state = targets[i]
        elif i > 0:
            state = state + cl.relax * (level[i - 1] - state) + eps[i]
        state = min(max(state, 0.02), 1.1)
        k[i] = state
    return k


def gen_synthetic(
    seed: int,
    days: int,
    station: str = "bondville",
    start: _dt.date = _dt.date(2019, 5, 1),
    sentinel_rate: float = 0.0,
) -> StationDataset:
    """``days`` gap-free days (1440 rows each) of synthetic data.

    With ``sentinel_rate`` > 0 that fraction of rows gets one randomly chosen
    measured variable replaced by -9999.9 with QC flag 1.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    key, info = resolve_station(station)
    cl = CLIMATES.get(key, Climate())
    rng = np.random.default_rng(np.random.SeedSequence([seed, sum(map(ord, key)), start.toordinal()]))
    n = days * 1440
    minute_of_day = np.tile(np.arange(1440), days)
    dates = [start + _dt.timedelta(days=d) for d in range(days)]
    day_idx = np.repeat(np.arange(days), 1440)
    year = np.array([d.year for d in dates])[day_idx]
    month = np.array([d.month for d in dates])[day_idx]
    dom = np.array([d.day for d in dates])[day_idx]
    jday = np.array([d.timetuple().tm_yday for d in dates])[day_idx]
    hour, minute = np.divmod(minute_of_day, 60)

    zen = solar_zenith(info.latitude, info.longitude, info.utc_offset, jday, minute_of_day)
    cosz = np.cos(np.radians(zen))
    up = cosz > 0.01
    clear = np.where(up, 1098.0 * cosz * np.exp(-0.057 / np.where(up, cosz, 1.0)), 0.0)
    diurnal = np.sin(2 * np.pi * (minute_of_day / 1440.0 - 0.375))
    rh_drift = np.repeat(rng.normal(0.0, 4.0, days), 1440)
    rh = np.clip(cl.mean_rh - 8.0 * diurnal + rh_drift + _ar1(rng, n, 0.998, 0.12), 5.0, 100.0)
    k = _cloud_index(rng, rh, cl)
    k_slow = np.convolve(k, np.ones(30) / 30, mode="same")

    def noise(sigma):
        return rng.normal(0.0, sigma, n)

    dw_solar = np.where(up, clear * k + noise(1.0), noise(0.8) - 1.5)
    dni_clear = np.where(up, 1000.0 * np.exp(-0.12 / np.where(up, cosz, 1.0)), 0.0)
    direct_n = np.maximum(dni_clear * np.clip((k - 0.3) / 0.75, 0.0, 1.0) ** 1.5 + noise(1.5), -1.0)
    diffuse = np.maximum(dw_solar - direct_n * np.maximum(cosz, 0.0), 0.0) + np.abs(noise(1.0))
    uw_solar = cl.albedo * np.maximum(dw_solar, 0.0) + noise(0.8)
    netsolar = dw_solar - uw_solar
    uvb = np.maximum(0.12 * np.maximum(dw_solar, 0.0) * np.sqrt(np.maximum(cosz, 0.0)) + noise(0.5), 0.0)
    par = np.maximum(0.435 * dw_solar + noise(1.5), 0.0)

    temp = cl.mean_temp + cl.temp_amplitude * diurnal - 3.0 * (1.0 - k_slow) + _ar1(rng, n, 0.999, 0.05)
    tk = temp + 273.15
    dw_ir = 0.75 * 5.670374e-8 * tk**4 + 70.0 * (1.0 - k_slow) + noise(1.0)
    uw_ir = 0.98 * 5.670374e-8 * (tk + 0.004 * np.maximum(dw_solar, 0.0)) ** 4 + noise(1.0)
    netir = dw_ir - uw_ir
    totalnet = netsolar + netir
    dw_casetemp = tk + noise(0.05)
    dw_dometemp = dw_casetemp - 0.1 + noise(0.05)
    uw_casetemp = tk + 0.5 + noise(0.05)
    uw_dometemp = uw_casetemp + 0.1 + noise(0.05)
    windspd = np.clip(4.5 + 1.5 * diurnal + _ar1(rng, n, 0.995, 0.15), 0.1, 25.0)
    winddir = np.mod(180.0 + np.cumsum(noise(1.5)), 360.0)
    base_p = 1013.25 * np.exp(-info.elevation / 8400.0)
    pressure = base_p + _ar1(rng, n, 0.9995, 0.02)

    values = dict(
        dw_solar=dw_solar, uw_solar=uw_solar, direct_n=direct_n, diffuse=diffuse, dw_ir=dw_ir,
        dw_casetemp=dw_casetemp, dw_dometemp=dw_dometemp, uw_ir=uw_ir, uw_casetemp=uw_casetemp,
        uw_dometemp=uw_dometemp, uvb=uvb, par=par, netsolar=netsolar, netir=netir, totalnet=totalnet,
        temp=temp, rh=rh, windspd=windspd, winddir=winddir, pressure=pressure,
    )  # fmt: skip
    cols: dict[str, np.ndarray] = {
        "year": year, "jday": jday, "month": month, "day": dom, "hour": hour, "minute": minute,
        "dt": np.round(minute_of_day / 60.0, DECIMALS["dt"]), "zen": np.round(zen, DECIMALS["zen"]),
    }  # fmt: skip
    for name in MEASURED_FIELDS:
        cols[name] = np.round(values[name], DECIMALS[name])
        cols["qc_" + name] = np.zeros(n, dtype=np.int64)
    if sentinel_rate > 0:
        hit = np.flatnonzero(rng.random(n) < sentinel_rate)
        which = rng.integers(0, len(MEASURED_FIELDS), hit.size)
        for row, j in zip(hit, which):
            name = MEASURED_FIELDS[j]
            cols[name][row] = SENTINEL
            cols["qc_" + name][row] = 1
    meta = StationMeta(info.name, info.latitude, info.longitude, info.elevation)
    return StationDataset(meta, cols)


def build_archive(root, seed: int = 2021, stations=tuple(STATIONS), layout=None, sentinel_rate: float = 0.002) -> Path:
    """Write the synthetic three-station archive as SURFRAD daily files.

    Per station: 12 May days of 2018, 12 of 2019 (training years) and 6 of
    2020 (validation year), under ``root/<station>/<year>/``.
    """
    root = Path(root)
    for i, station in enumerate(stations):
        for year, days in ARCHIVE_LAYOUT.items():
            start = _dt.date(year, *ARCHIVE_START)
            ds = gen_synthetic(seed + 1000 * i, days, station, start=start, sentinel_rate=sentinel_rate)
            if layout is None:
                write_daily_files(ds, root, station)
            else:
                write_daily_files(ds, root, station, layout)
    return root


def synthetic_climate(station: str, **changes) -> Climate:
    key, _ = resolve_station(station)
    return replace(CLIMATES.get(key, Climate()), **changes)
