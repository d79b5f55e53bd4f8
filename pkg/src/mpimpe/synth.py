"""Deterministic synthetic load and per-unit PV profiles.

Two presets reproduce the two qualitative community types: a load that
peaks on winter evenings after sunset with strongly seasonal PV, and a load
that peaks on summer afternoons together with the PV output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidSpec
from .profiles import ALLOWED_DT, MAX_HOURS, PV_UNIT_MAX, LoadProfile, PvUnitProfile, TimeSeries

SOLSTICE_DAY = 172


@dataclass(frozen=True)
class SynthSpec:
    days: int = 365
    dt: float = 1.0
    year: int = 2017
    start_day: int = 1  # day of year of the first sample
    load_base_mw: float = 22.0
    load_daily_amp_mw: float = 6.0
    load_seasonal_amp_mw: float = 6.0
    load_peak_hour: float = 18.5
    load_peak_day: float = 15.0
    pv_clearsky_peak_pu: float = 0.65
    pv_seasonal_amp_pu: float = 0.3
    daylength_mean_h: float = 12.2
    daylength_amp_h: float = 4.0
    solar_noon_h: float = 12.5
    cloud_seed: int = 0
    cloud_persistence: float = 0.97  # hourly AR(1) coefficient
    cloud_min: float = 0.3

    def validate(self) -> None:
        if self.days < 1 or self.days * 24 > MAX_HOURS:
            raise InvalidSpec(f"days must be in [1, {int(MAX_HOURS // 24)}]")
        if self.dt not in ALLOWED_DT:
            raise InvalidSpec(f"dt must be one of {ALLOWED_DT}")
        if not 1 <= self.start_day <= 366:
            raise InvalidSpec("start_day must be a day of year")
        if min(self.load_daily_amp_mw, self.load_seasonal_amp_mw) < 0:
            raise InvalidSpec("amplitudes must be >= 0")
        if self.load_base_mw - self.load_daily_amp_mw - self.load_seasonal_amp_mw < 0:
            raise InvalidSpec("load would become negative")
        lo = self.pv_clearsky_peak_pu - abs(self.pv_seasonal_amp_pu)
        hi = self.pv_clearsky_peak_pu + abs(self.pv_seasonal_amp_pu)
        if lo < 0 or hi > PV_UNIT_MAX:
            raise InvalidSpec(f"PV peak must stay within [0, {PV_UNIT_MAX}]")
        if not 0 < self.daylength_mean_h - abs(self.daylength_amp_h) <= self.daylength_mean_h + abs(self.daylength_amp_h) < 24:
            raise InvalidSpec("day length must stay within (0, 24) h")
        if not 0 <= self.cloud_persistence < 1 or not 0 <= self.cloud_min <= 1:
            raise InvalidSpec("cloud parameters out of range")

    @property
    def start_time(self) -> datetime:
        return datetime(self.year, 1, 1) + timedelta(days=self.start_day - 1)


PRESETS = {
    # load peaks 18:00-19:00 in January, after sunset; PV strongly seasonal
    "winter-evening-peak": SynthSpec(),
    # load peaks 14:00-16:00 in August, while PV produces; PV nearly flat over the year
    "summer-afternoon-peak": SynthSpec(
        load_base_mw=20.0,
        load_daily_amp_mw=8.0,
        load_seasonal_amp_mw=6.0,
        load_peak_hour=15.0,
        load_peak_day=225.0,
        pv_clearsky_peak_pu=0.75,
        pv_seasonal_amp_pu=0.08,
        daylength_mean_h=12.1,
        daylength_amp_h=2.3,
        solar_noon_h=12.0,
        cloud_seed=1,
    ),
}


def preset(name: str, **overrides) -> SynthSpec:
    try:
        base = PRESETS[name]
    except KeyError:
        raise InvalidSpec(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return dataclasses.replace(base, **overrides)


def cloud_factor(n: int, dt: float, seed: int, persistence: float = 0.97, floor: float = 0.3) -> np.ndarray:
    """Smooth multiplicative cloud process in ``[floor, 1]``."""
    rng = np.random.default_rng(seed)
    phi = persistence ** dt
    eps = rng.standard_normal(n)
    eps[1:] *= np.sqrt(1 - phi * phi)
    z = lfilter([1.0], [1.0, -phi], eps)  # stationary unit-variance AR(1)
    clear = 1.0 / (1.0 + np.exp(-2.0 * (z + 0.5)))
    return floor + (1.0 - floor) * clear


def generate(spec: SynthSpec) -> tuple[LoadProfile, PvUnitProfile]:
    spec.validate()
    n = round(spec.days * 24 / spec.dt)
    hours = (np.arange(n) + 0.5) * spec.dt  # interval midpoints
    clock = hours % 24
    day = spec.start_day + hours / 24
    year_frac = 2 * np.pi / 365.0

    load = (
        spec.load_base_mw
        + spec.load_daily_amp_mw * np.cos(2 * np.pi * (clock - spec.load_peak_hour) / 24)
        + spec.load_seasonal_amp_mw * np.cos(year_frac * (day - spec.load_peak_day))
    )
    load = np.maximum(load, 0.0)

    season = np.cos(year_frac * (day - SOLSTICE_DAY))
    daylength = spec.daylength_mean_h + spec.daylength_amp_h * season
    since_sunrise = clock - (spec.solar_noon_h - daylength / 2)
    daylight = (since_sunrise > 0) & (since_sunrise < daylength)
    envelope = np.where(daylight, np.sin(np.pi * np.clip(since_sunrise / daylength, 0, 1)), 0.0)
    peak_pu = spec.pv_clearsky_peak_pu + spec.pv_seasonal_amp_pu * season
    clouds = cloud_factor(n, spec.dt, spec.cloud_seed, spec.cloud_persistence, spec.cloud_min)
    pv = np.clip(envelope * peak_pu * clouds, 0.0, PV_UNIT_MAX)

    start = spec.start_time
    return LoadProfile(TimeSeries(start, spec.dt, load)), PvUnitProfile(TimeSeries(start, spec.dt, pv))
