"""Power time series, CSV ingestion, PV sizing and net-load decomposition.

All power samples are interval averages in MW: ``values[i]`` is the mean
power over ``[start_time + i*dt, start_time + (i+1)*dt)``. Energies are
``sum(values) * dt`` in MWh.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    IncompatibleResolution,
    InvalidSpec,
    MalformedRow,
    MisalignedSeries,
    NegativeValue,
    NonUniformSpacing,
    ZeroPeak,
    ZeroYield,
)

ALLOWED_DT = (0.25, 1.0)
MAX_HOURS = 8784.0
PV_UNIT_MAX = 1.2


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)  # always a private copy
    if arr.ndim != 1:
        raise InvalidSpec("series values must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled interval-average power values."""

    start_time: datetime
    dt: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "dt", float(self.dt))
        if not self.dt > 0:
            raise InvalidSpec(f"dt must be positive, got {self.dt}")
        if self.values.size == 0:
            raise InvalidSpec("series must contain at least one value")
        if not np.all(np.isfinite(self.values)):
            raise InvalidSpec("series contains non-finite values")
        if self.values.size * self.dt > MAX_HOURS + 1e-9:
            raise InvalidSpec(
                f"series spans {self.values.size * self.dt} h, more than one year"
            )

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.start_time == other.start_time
            and self.dt == other.dt
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def energy(self) -> float:
        """Total energy in MWh."""
        return float(self.values.sum() * self.dt)

    @property
    def duration_h(self) -> float:
        return self.values.size * self.dt

    def timestamp(self, i: int) -> datetime:
        return self.start_time + timedelta(seconds=round(i * self.dt * 3600))

    def timestamps(self) -> list[datetime]:
        return [self.timestamp(i) for i in range(len(self))]

    def is_aligned(self, other: TimeSeries) -> bool:
        return (
            self.start_time == other.start_time
            and self.dt == other.dt
            and len(self) == len(other)
        )

    def with_values(self, values) -> TimeSeries:
        return TimeSeries(self.start_time, self.dt, values)


@dataclass(frozen=True, eq=False)
class LoadProfile:
    """Community demand in MW; all samples non-negative."""

    series: TimeSeries

    def __post_init__(self):
        v = self.series.values
        if np.any(v < 0):
            raise NegativeValue("load must be non-negative", row=int(np.argmax(v < 0)))

    @cached_property
    def peak(self) -> float:
        return float(self.series.values.max())

    @cached_property
    def annual_energy(self) -> float:
        return self.series.energy


@dataclass(frozen=True, eq=False)
class PvUnitProfile:
    """PV output per MW_p of nominal capacity (dimensionless)."""

    series: TimeSeries

    def __post_init__(self):
        v = self.series.values
        if np.any(v < 0):
            raise NegativeValue("PV unit output must be non-negative", row=int(np.argmax(v < 0)))
        if np.any(v > PV_UNIT_MAX):
            raise InvalidSpec(
                f"PV unit output above {PV_UNIT_MAX} at step {int(np.argmax(v > PV_UNIT_MAX))}"
            )

    @cached_property
    def unit_annual_energy(self) -> float:
        """MWh generated per MW_p over the covered period."""
        return self.series.energy


@dataclass(frozen=True)
class PvSize:
    """PV nominal capacity expressed as percent of the community peak load."""

    capacity_pct: float
    peak_load_mw: float

    def __post_init__(self):
        if self.capacity_pct < 0 or not math.isfinite(self.capacity_pct):
            raise InvalidSpec(f"capacity_pct must be >= 0, got {self.capacity_pct}")
        if self.peak_load_mw < 0:
            raise InvalidSpec("peak load must be >= 0")

    @classmethod
    def for_load(cls, load: LoadProfile, capacity_pct: float) -> PvSize:
        return cls(capacity_pct, load.peak)

    @property
    def nominal_mw(self) -> float:
        return self.peak_load_mw * self.capacity_pct / 100.0


@dataclass(frozen=True, eq=False)
class NetLoadDecomposition:
    """Residual load ``rl`` and surplus generation ``sg``, never both positive."""

    rl: TimeSeries
    sg: TimeSeries

    def __post_init__(self):
        if not self.rl.is_aligned(self.sg):
            raise MisalignedSeries("rl and sg must share start, dt and length")
        rl, sg = self.rl.values, self.sg.values
        if np.any(rl < 0) or np.any(sg < 0):
            raise NegativeValue("rl and sg must be non-negative")
        if np.any(np.minimum(rl, sg) > 1e-9):
            raise InvalidSpec("rl and sg are both positive at some step")

    def __len__(self) -> int:
        return len(self.rl)

    @property
    def dt(self) -> float:
        return self.rl.dt

    @property
    def start_time(self) -> datetime:
        return self.rl.start_time

    @property
    def net(self) -> np.ndarray:
        return self.rl.values - self.sg.values

    def slice(self, start: int, stop: int) -> NetLoadDecomposition:
        return NetLoadDecomposition(
            TimeSeries(self.rl.timestamp(start), self.dt, self.rl.values[start:stop]),
            TimeSeries(self.sg.timestamp(start), self.dt, self.sg.values[start:stop]),
        )

    def with_surplus_cap(self, cap: float) -> NetLoadDecomposition:
        """Surplus clipped at ``cap`` MW (static feed-in limit)."""
        return NetLoadDecomposition(self.rl, self.sg.with_values(np.minimum(self.sg.values, cap)))


# -- CSV ---------------------------------------------------------------------


@dataclass(frozen=True)
class CsvSchema:
    timestamp: str = "timestamp"
    value: str = "value"


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def ingest_csv(
    path,
    schema: CsvSchema = CsvSchema(),
    dt: float | None = None,
    nonnegative: bool = True,
) -> TimeSeries:
    """Read a ``timestamp,value`` CSV into a validated :class:`TimeSeries`.

    Rows must be strictly time-ordered with spacing exactly ``dt`` hours
    (inferred from the first two rows when not given). Row indices in error
    messages count data rows from 0, excluding the header.
    """
    path = Path(path)
    stamps: list[datetime] = []
    values: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow("file is empty") from None
        try:
            ts_col = header.index(schema.timestamp)
            val_col = header.index(schema.value)
        except ValueError:
            raise MalformedRow(
                f"header must contain columns {schema.timestamp!r} and {schema.value!r}, got {header}"
            ) from None
        for i, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                raise MalformedRow("empty row", row=i)
            if len(row) != len(header):
                raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", row=i)
            try:
                stamp = _parse_timestamp(row[ts_col])
            except ValueError:
                raise MalformedRow(f"bad timestamp {row[ts_col]!r}", row=i) from None
            try:
                value = float(row[val_col])
            except ValueError:
                raise MalformedRow(f"bad value {row[val_col]!r}", row=i) from None
            if not math.isfinite(value):
                raise MalformedRow(f"non-finite value {row[val_col]!r}", row=i)
            if nonnegative and value < 0:
                raise NegativeValue(f"negative value {row[val_col]!r}", row=i)
            stamps.append(stamp)
            values.append(value)

    if not values:
        raise MalformedRow("no data rows")
    if dt is None:
        if len(stamps) < 2:
            raise MalformedRow("cannot infer the interval from a single row; pass dt")
        try:
            dt = (stamps[1] - stamps[0]).total_seconds() / 3600.0
        except TypeError:
            raise MalformedRow("mixed naive and timezone-aware timestamps", row=1) from None
    if dt not in ALLOWED_DT:
        raise IncompatibleResolution(f"interval {dt} h not in {ALLOWED_DT}")
    step = timedelta(hours=dt)
    for i in range(1, len(stamps)):
        try:
            gap = stamps[i] - stamps[i - 1]
        except TypeError:
            raise MalformedRow("mixed naive and timezone-aware timestamps", row=i) from None
        if gap != step:
            raise NonUniformSpacing(
                f"spacing {gap.total_seconds() / 3600:g} h, expected {dt:g} h", row=i
            )
    return TimeSeries(stamps[0], dt, values)


def write_csv(series: TimeSeries, path) -> None:
    """Write ``series`` in the format :func:`ingest_csv` reads (values round-trip exactly)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("timestamp,value\n")
        for i, v in enumerate(series.values):
            fh.write(f"{series.timestamp(i).isoformat()},{float(v)!r}\n")


# -- transformations ---------------------------------------------------------


def resample_to(series: TimeSeries, target_dt: float) -> TimeSeries:
    """Convert between 15-min and hourly resolution, conserving energy."""
    if target_dt not in ALLOWED_DT or series.dt not in ALLOWED_DT:
        raise IncompatibleResolution(f"can only resample between {ALLOWED_DT} h")
    if target_dt == series.dt:
        return series
    if target_dt > series.dt:
        k = round(target_dt / series.dt)
        if len(series) % k:
            raise IncompatibleResolution(
                f"length {len(series)} is not a multiple of {k} steps"
            )
        return TimeSeries(series.start_time, target_dt, series.values.reshape(-1, k).mean(axis=1))
    k = round(series.dt / target_dt)
    return TimeSeries(series.start_time, target_dt, np.repeat(series.values, k))


def scale_to_peak(load: LoadProfile, target_peak: float) -> LoadProfile:
    if load.peak <= 0:
        raise ZeroPeak("cannot scale a profile whose peak is zero")
    if target_peak <= 0:
        raise ZeroPeak(f"target peak must be positive, got {target_peak}")
    factor = target_peak / load.peak
    scaled = load.series.values * factor
    # peak samples are set exactly so rounding cannot move the peak
    scaled[load.series.values == load.peak] = target_peak
    return LoadProfile(load.series.with_values(scaled))


def pv_generation(unit: PvUnitProfile, size: PvSize) -> TimeSeries:
    """PV output in MW for a plant of ``size``."""
    return unit.series.with_values(unit.series.values * size.nominal_mw)


def energy_size_pct(load: LoadProfile, unit: PvUnitProfile) -> float:
    """Capacity size (percent of peak) whose PV energy equals the demand energy."""
    if unit.unit_annual_energy <= 0:
        raise ZeroYield("PV unit profile produces no energy")
    if load.peak <= 0:
        raise ZeroPeak("load peak is zero")
    return 100.0 * (load.annual_energy / unit.unit_annual_energy) / load.peak


def decompose(load: TimeSeries, pv: TimeSeries) -> NetLoadDecomposition:
    if not load.is_aligned(pv):
        raise MisalignedSeries(
            f"load ({load.start_time}, dt={load.dt}, n={len(load)}) and "
            f"pv ({pv.start_time}, dt={pv.dt}, n={len(pv)}) are not aligned"
        )
    net = load.values - pv.values
    return NetLoadDecomposition(
        load.with_values(np.maximum(net, 0.0)),
        load.with_values(np.maximum(-net, 0.0)),
    )
