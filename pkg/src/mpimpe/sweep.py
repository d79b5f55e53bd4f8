"""Scenario grids over PV size and battery ratio, and MPI-MPE curve metrics."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dispatch import BatterySpec, DispatchConfig, rolling_horizon
from .errors import EmptyCurve, InvalidSpec, MisalignedSeries, MissingReferencePoint
from .metrics import case1_metrics, curtailment_cap
from .profiles import LoadProfile, PvSize, PvUnitProfile, decompose, pv_generation

DEFAULT_SIZES = tuple(float(s) for s in range(0, 481, 10))
DEFAULT_RATIOS = (0.0, 1.5, 2.5, 3.5, 4.5)


def battery_capacity(peak_load: float, pv_size_pct: float, ratio: float) -> float:
    """Battery MWh for ``ratio`` kWh per kW of installed PV."""
    if peak_load < 0 or pv_size_pct < 0 or ratio < 0:
        raise InvalidSpec("peak load, PV size and ratio must be >= 0")
    return peak_load * pv_size_pct / 100.0 * ratio


@dataclass(frozen=True)
class SweepSpec:
    pv_sizes_pct: tuple = DEFAULT_SIZES
    battery_ratios: tuple = DEFAULT_RATIOS
    curtail_fraction: float | None = None
    battery: BatterySpec = field(default_factory=lambda: BatterySpec(0.0))
    refine: bool = False
    refine_resolution_pct: float = 1.0

    def __post_init__(self):
        sizes = tuple(float(s) for s in self.pv_sizes_pct)
        ratios = tuple(float(r) for r in self.battery_ratios)
        if not sizes or any(s < 0 for s in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidSpec("PV sizes must be non-empty, >= 0 and strictly increasing")
        if not ratios or any(r < 0 for r in ratios):
            raise InvalidSpec("battery ratios must be non-empty and >= 0")
        object.__setattr__(self, "pv_sizes_pct", sizes)
        object.__setattr__(self, "battery_ratios", ratios)


@dataclass(frozen=True)
class MpiMpePoint:
    pv_size_pct: float
    battery_ratio: float
    battery_mwh: float
    mpi: float
    mpe: float

    @property
    def grid_interaction(self) -> float:
        return max(self.mpi, self.mpe)


@dataclass(frozen=True)
class ScenarioFailure:
    pv_size_pct: float
    battery_ratio: float
    error: str


@dataclass(frozen=True)
class AvoidedTransmission:
    reference_mpi: float
    range_pct: float
    degree_mw: float
    degree_pct: float
    argmin_pv_pct: float
    min_grid_interaction: float

    def to_dict(self) -> dict:
        return {k: round(v, 6) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    failures: tuple = ()

    def ratios(self) -> list[float]:
        seen = []
        for p in self.points:
            if p.battery_ratio not in seen:
                seen.append(p.battery_ratio)
        return seen

    def curve(self, ratio: float) -> list[MpiMpePoint]:
        pts = [p for p in self.points if p.battery_ratio == ratio]
        return sorted(pts, key=lambda p: p.pv_size_pct)

    def avoided_transmission(self) -> dict[float, AvoidedTransmission]:
        return {r: avoided_transmission(self.curve(r)) for r in self.ratios()}

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pv_size_pct", "battery_ratio", "battery_mwh", "mpi_mw", "mpe_mw", "grid_interaction_mw"])
            for p in self.points:
                w.writerow([f"{p.pv_size_pct:.6f}", f"{p.battery_ratio:.6f}", f"{p.battery_mwh:.6f}",
                            f"{p.mpi:.6f}", f"{p.mpe:.6f}", f"{p.grid_interaction:.6f}"])

    def summary(self) -> dict:
        per_ratio = {}
        for r in self.ratios():
            try:
                per_ratio[f"{r:g}"] = avoided_transmission(self.curve(r)).to_dict()
            except (EmptyCurve, MissingReferencePoint) as exc:
                per_ratio[f"{r:g}"] = {"error": str(exc)}
        return {
            "avoided_transmission": per_ratio,
            "failures": [asdict(f) for f in self.failures],
        }

    def write_summary(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


# -- scenarios ---------------------------------------------------------------


def run_scenario(
    load: LoadProfile,
    unit_pv: PvUnitProfile,
    pv_size_pct: float,
    ratio: float,
    curtail_fraction: float | None = None,
    battery: BatterySpec = BatterySpec(0.0),
    cfg: DispatchConfig = DispatchConfig(),
) -> MpiMpePoint:
    pv = pv_generation(unit_pv, PvSize.for_load(load, pv_size_pct))
    decomp = decompose(load.series, pv)
    if curtail_fraction is not None and pv.energy > 0:
        decomp = curtailment_cap(decomp, pv.energy, curtail_fraction).apply(decomp)
    capacity = battery_capacity(load.peak, pv_size_pct, ratio)
    if capacity == 0:
        # a zero-capacity battery cannot act, so the PV-only maxima are exact
        m = case1_metrics(decomp)
        return MpiMpePoint(pv_size_pct, ratio, 0.0, m.mrl, m.msg)
    sol = rolling_horizon(decomp, battery.with_capacity(capacity), cfg)
    return MpiMpePoint(pv_size_pct, ratio, capacity, sol.mpi, sol.mpe)


def _job(args):
    load, unit_pv, size, ratio, frac, battery, cfg = args
    try:
        return run_scenario(load, unit_pv, size, ratio, frac, battery, cfg)
    except Exception as exc:  # reported per scenario; the sweep continues
        return ScenarioFailure(size, ratio, f"{type(exc).__name__}: {exc}")


def _run_jobs(jobs_args, jobs: int, progress):
    total = len(jobs_args)
    if jobs <= 1 or total <= 1:
        results = []
        for i, a in enumerate(jobs_args):
            results.append(_job(a))
            if progress is not None:
                progress(i + 1, total, results[-1])
        return results
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futures = [ex.submit(_job, a) for a in jobs_args]
        results = []
        for i, f in enumerate(futures):
            results.append(f.result())
            if progress is not None:
                progress(i + 1, total, results[-1])
        return results


def run_sweep(
    load: LoadProfile,
    unit_pv: PvUnitProfile,
    spec: SweepSpec = SweepSpec(),
    battery_cfg: DispatchConfig = DispatchConfig(),
    jobs: int = 1,
    progress=None,
) -> SweepResult:
    """Evaluate every (PV size, battery ratio) pair.

    Results are ordered by ratio, then PV size, whatever the worker count.
    Failed scenarios are collected in ``failures`` and do not stop the sweep.
    ``progress(done, total, outcome)`` is called once per scenario.
    """
    if not load.series.is_aligned(unit_pv.series):
        raise MisalignedSeries("load and PV profiles are not aligned")
    args = [
        (load, unit_pv, s, r, spec.curtail_fraction, spec.battery, battery_cfg)
        for r in spec.battery_ratios
        for s in spec.pv_sizes_pct
    ]
    outcomes = _run_jobs(args, jobs, progress)
    points = [o for o in outcomes if isinstance(o, MpiMpePoint)]
    failures = [o for o in outcomes if isinstance(o, ScenarioFailure)]
    if spec.refine:
        for r in spec.battery_ratios:
            curve = sorted((p for p in points if p.battery_ratio == r), key=lambda p: p.pv_size_pct)
            points.extend(refine_intersection(load, unit_pv, curve, spec, battery_cfg))
        order = {r: i for i, r in enumerate(spec.battery_ratios)}
        points.sort(key=lambda p: (order[p.battery_ratio], p.pv_size_pct))
    return SweepResult(tuple(points), tuple(failures))


def refine_intersection(
    load: LoadProfile,
    unit_pv: PvUnitProfile,
    curve: list[MpiMpePoint],
    spec: SweepSpec,
    cfg: DispatchConfig = DispatchConfig(),
) -> list[MpiMpePoint]:
    """Bisect on PV size where MPI falls below MPE, down to ``spec.refine_resolution_pct``.

    Returns only the newly evaluated points.
    """
    bracket = None
    for a, b in zip(curve, curve[1:]):
        if a.mpi >= a.mpe and b.mpi < b.mpe:
            bracket = (a, b)
            break
    if bracket is None:
        return []
    a, b = bracket
    ratio = a.battery_ratio
    extra = []
    while b.pv_size_pct - a.pv_size_pct > spec.refine_resolution_pct:
        mid = 0.5 * (a.pv_size_pct + b.pv_size_pct)
        p = run_scenario(load, unit_pv, mid, ratio, spec.curtail_fraction, spec.battery, cfg)
        extra.append(p)
        if p.mpi >= p.mpe:
            a = p
        else:
            b = p
    return extra


# -- curve metrics -----------------------------------------------------------


def avoided_transmission(points) -> AvoidedTransmission:
    """Range and degree of avoided transmission for one battery ratio.

    The reference is the grid interaction without PV. The degree is how far
    the best PV size pushes grid interaction below it; the range is the PV
    size where the export curve crosses the reference, linearly interpolated
    between grid points.
    """
    pts = sorted(points, key=lambda p: p.pv_size_pct)
    if not pts:
        raise EmptyCurve("curve has no points")
    if pts[0].pv_size_pct != 0:
        raise MissingReferencePoint("curve must include PV size 0")
    sizes = np.array([p.pv_size_pct for p in pts])
    mpe = np.array([p.mpe for p in pts])
    gi = np.array([p.grid_interaction for p in pts])
    ref = float(gi[0])
    k_min = int(np.argmin(gi))
    degree = ref - float(gi[k_min])
    tol = 1e-9 * max(1.0, ref)
    above = np.flatnonzero(mpe > ref + tol)
    if above.size == 0:
        range_pct = float(sizes[-1])
    else:
        k = int(above[0])
        s0, s1, e0, e1 = sizes[k - 1], sizes[k], mpe[k - 1], mpe[k]
        range_pct = float(s0 + (ref - e0) / (e1 - e0) * (s1 - s0))
    return AvoidedTransmission(
        reference_mpi=ref,
        range_pct=range_pct,
        degree_mw=degree,
        degree_pct=100.0 * degree / ref if ref > 0 else 0.0,
        argmin_pv_pct=float(sizes[k_min]),
        min_grid_interaction=float(gi[k_min]),
    )
