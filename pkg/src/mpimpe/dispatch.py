"""Battery scheduling that minimizes the peak grid exchange.

Each window LP has per-step variables charge ``ch``, discharge for
self-consumption ``ds``, discharge to the grid ``dg`` and state of charge
``soc``, plus one scalar ``p_max``::

    min  (1 - l1 - l2) * p_max - l1 * sum(ds) + l2 * sum(dg)
    s.t. soc_min*C <= soc_t <= soc_max*C
         ch_t <= sg_t,  ds_t <= rl_t
         soc_t = soc_{t-1} + (ch_t - ds_t - dg_t) * dt
         rl_t - ds_t <= p_max
         sg_t - ch_t + dg_t <= p_max
         all variables >= 0

The year is covered by a rolling horizon whose control blocks start at a
fixed clock hour; only the control block of each window is committed.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InfeasibleSpec, InvalidSpec, WindowSolveError
from .lp import LinearProgram, SolverOptions, solve
from .profiles import NetLoadDecomposition, TimeSeries


@dataclass(frozen=True)
class BatterySpec:
    capacity_mwh: float
    soc_min_frac: float = 0.1
    soc_max_frac: float = 0.9
    initial_soc_frac: float = 0.5

    def __post_init__(self):
        if not self.capacity_mwh >= 0:
            raise InvalidSpec(f"capacity must be >= 0, got {self.capacity_mwh}")
        if not 0 <= self.soc_min_frac < self.soc_max_frac <= 1:
            raise InvalidSpec("need 0 <= soc_min_frac < soc_max_frac <= 1")
        if not self.soc_min_frac <= self.initial_soc_frac <= self.soc_max_frac:
            raise InvalidSpec("initial SOC must lie inside the SOC window")

    @property
    def soc_min(self) -> float:
        return self.soc_min_frac * self.capacity_mwh

    @property
    def soc_max(self) -> float:
        return self.soc_max_frac * self.capacity_mwh

    @property
    def initial_soc(self) -> float:
        return self.initial_soc_frac * self.capacity_mwh

    def with_capacity(self, capacity_mwh: float) -> BatterySpec:
        return BatterySpec(capacity_mwh, self.soc_min_frac, self.soc_max_frac, self.initial_soc_frac)


@dataclass(frozen=True)
class DispatchConfig:
    lambda1: float = 1e-3
    lambda2: float = 1e-6
    control_horizon_h: float = 24.0
    prediction_horizon_h: float = 144.0
    window_anchor_hour: float = 9.0
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not (0 <= self.lambda1 <= 1 and 0 <= self.lambda2 <= 1 and self.lambda1 + self.lambda2 < 1):
            raise InvalidSpec("objective weights need 0 <= l1, l2 and l1 + l2 < 1")
        if self.control_horizon_h <= 0 or self.prediction_horizon_h < 0:
            raise InvalidSpec("control horizon must be positive, prediction horizon >= 0")
        if not 0 <= self.window_anchor_hour < 24:
            raise InvalidSpec("anchor hour must lie in [0, 24)")

    @property
    def window_h(self) -> float:
        return self.control_horizon_h + self.prediction_horizon_h

    def to_dict(self) -> dict:
        d = asdict(self)
        d["solver"] = asdict(self.solver)
        return d


@dataclass(frozen=True, eq=False)
class WindowSolution:
    p_max: float
    ch: np.ndarray
    ds: np.ndarray
    dg: np.ndarray
    soc: np.ndarray
    objective_value: float


@dataclass(frozen=True)
class WindowInfo:
    index: int
    start: int
    commit_stop: int
    span_stop: int
    p_max: float


@dataclass(frozen=True, eq=False)
class DispatchSolution:
    ch: np.ndarray
    ds: np.ndarray
    dg: np.ndarray
    soc: np.ndarray
    windows: tuple
    mpi: float
    mpe: float
    battery: BatterySpec
    initial_soc: float

    @property
    def window_p_max(self) -> list[float]:
        return [w.p_max for w in self.windows]

    @property
    def grid_interaction(self) -> float:
        return max(self.mpi, self.mpe)

    def grid_import(self, decomp: NetLoadDecomposition) -> np.ndarray:
        return decomp.rl.values - self.ds

    def grid_export(self, decomp: NetLoadDecomposition) -> np.ndarray:
        return decomp.sg.values - self.ch + self.dg

    def summary(self) -> dict:
        return {
            "mpi_mw": round(self.mpi, 6),
            "mpe_mw": round(self.mpe, 6),
            "grid_interaction_mw": round(self.grid_interaction, 6),
            "battery_mwh": round(self.battery.capacity_mwh, 6),
            "window_p_max_mw": [round(p, 6) for p in self.window_p_max],
            "windows": [
                {"index": w.index, "start": w.start, "commit_stop": w.commit_stop, "span_stop": w.span_stop}
                for w in self.windows
            ],
        }

    def to_csv(self, path, decomp: NetLoadDecomposition) -> None:
        imp, exp = self.grid_import(decomp), self.grid_export(decomp)
        cols = (decomp.rl.values, decomp.sg.values, self.ch, self.ds, self.dg, self.soc, imp, exp)
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["timestamp", "rl", "sg", "ch", "ds", "dg", "soc", "import", "export"])
            for i in range(len(decomp)):
                w.writerow([decomp.rl.timestamp(i).isoformat()] + [f"{c[i]:.6f}" for c in cols])


# -- single window -----------------------------------------------------------


@dataclass(frozen=True)
class WindowLayout:
    """Column indices of the window LP."""

    n: int

    @property
    def ch(self) -> slice:
        return slice(0, self.n)

    @property
    def ds(self) -> slice:
        return slice(self.n, 2 * self.n)

    @property
    def dg(self) -> slice:
        return slice(2 * self.n, 3 * self.n)

    @property
    def soc(self) -> slice:
        return slice(3 * self.n, 4 * self.n)

    @property
    def p_max(self) -> int:
        return 4 * self.n

    @property
    def num_vars(self) -> int:
        return 4 * self.n + 1


def _as_array(series) -> np.ndarray:
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)


def build_window_lp(
    rl, sg, battery: BatterySpec, cfg: DispatchConfig = DispatchConfig(), s_start: float | None = None,
    dt: float | None = None,
) -> LinearProgram:
    """LP for one window. ``rl``/``sg`` are TimeSeries or arrays (then pass ``dt``).

    The surplus limit on charging and the residual-load limit on
    self-consumption discharge are expressed as variable bounds.
    """
    if isinstance(rl, TimeSeries):
        dt = rl.dt if dt is None else dt
    dt = 1.0 if dt is None else float(dt)
    rl, sg = _as_array(rl), _as_array(sg)
    if rl.shape != sg.shape or rl.ndim != 1 or rl.size == 0:
        raise InvalidSpec("rl and sg must be aligned non-empty 1-d series")
    if np.any(rl < 0) or np.any(sg < 0):
        raise InvalidSpec("rl and sg must be non-negative")
    s_start = battery.initial_soc if s_start is None else float(s_start)
    tol = 1e-9 * max(1.0, battery.capacity_mwh)
    if not battery.soc_min - tol <= s_start <= battery.soc_max + tol:
        raise InvalidSpec(f"start SOC {s_start} outside [{battery.soc_min}, {battery.soc_max}]")
    s_start = min(max(s_start, battery.soc_min), battery.soc_max)

    n = rl.size
    L = WindowLayout(n)
    l1, l2 = cfg.lambda1, cfg.lambda2
    c = np.zeros(L.num_vars)
    c[L.ds] = -l1
    c[L.dg] = l2
    c[L.p_max] = 1.0 - l1 - l2

    eye = sp.identity(n, format="csr")
    shift = sp.eye(n, k=-1, format="csr")
    zero = sp.csr_matrix((n, n))
    p_col = sp.csr_matrix(-np.ones((n, 1)))
    # soc_t - soc_{t-1} - dt*ch_t + dt*ds_t + dt*dg_t = 0   (soc_{-1} = s_start)
    soc_rows = sp.hstack([-dt * eye, dt * eye, dt * eye, eye - shift, sp.csr_matrix((n, 1))])
    # -ds_t - p_max <= -rl_t
    imp_rows = sp.hstack([zero, -eye, zero, zero, p_col])
    # -ch_t + dg_t - p_max <= -sg_t
    exp_rows = sp.hstack([-eye, zero, eye, zero, p_col])
    A = sp.vstack([soc_rows, imp_rows, exp_rows], format="csr")
    soc_rhs = np.zeros(n)
    soc_rhs[0] = s_start
    rhs = np.concatenate([soc_rhs, -rl, -sg])
    senses = ["=="] * n + ["<="] * (2 * n)

    lo = np.zeros(L.num_vars)
    hi = np.full(L.num_vars, np.inf)
    hi[L.ch] = sg
    hi[L.ds] = rl
    hi[L.dg] = (battery.soc_max - battery.soc_min) / dt
    lo[L.soc] = battery.soc_min
    hi[L.soc] = battery.soc_max
    return LinearProgram(c, A, senses, rhs, lo, hi)


def solve_window(
    rl, sg, battery: BatterySpec, cfg: DispatchConfig = DispatchConfig(), s_start: float | None = None,
    dt: float | None = None, window: int = 0, start_index: int | None = None,
) -> WindowSolution:
    lp = build_window_lp(rl, sg, battery, cfg, s_start, dt)
    res = solve(lp, cfg.solver)
    if not res.ok:
        if res.status.value == "Infeasible":
            raise InfeasibleSpec(f"window {window}: dispatch LP infeasible ({res.message})")
        raise WindowSolveError(window, res.status.value, start_index)
    L = WindowLayout((lp.num_vars - 1) // 4)
    x = res.x
    ch = np.maximum(x[L.ch], 0.0)
    ds = np.maximum(x[L.ds], 0.0)
    dg = np.maximum(x[L.dg], 0.0)
    return WindowSolution(float(x[L.p_max]), ch, ds, dg, x[L.soc].copy(), res.objective_value)


# -- rolling horizon ---------------------------------------------------------


def first_anchor_index(start_time: datetime, dt: float, anchor_hour: float) -> int:
    """Index of the first step that begins at or after the anchor clock time."""
    start_min = start_time.hour * 60 + start_time.minute + start_time.second / 60
    offset = (anchor_hour * 60 - start_min) % 1440
    return int(np.ceil(offset / (dt * 60) - 1e-9))


def extract_mpi_mpe(sol, decomp: NetLoadDecomposition) -> tuple[float, float]:
    """Peak import and export after storage action, clamped at zero."""
    mpi = float(np.max(decomp.rl.values - sol.ds))
    mpe = float(np.max(decomp.sg.values - sol.ch + sol.dg))
    return max(mpi, 0.0), max(mpe, 0.0)


def _windows(total: int, dt: float, start_time: datetime, cfg: DispatchConfig):
    """Yield ``(start, commit_stop, span_stop)`` for each rolling window."""
    ctrl = max(1, round(cfg.control_horizon_h / dt))
    span = max(ctrl, round(cfg.window_h / dt))
    first = first_anchor_index(start_time, dt, cfg.window_anchor_hour)
    start = 0
    block_stop = first if first > 0 else ctrl
    while start < total:
        span_stop = min(start + span, total)
        # once the window sees the end of the data nothing is left to re-plan
        commit_stop = total if span_stop == total else min(block_stop, total)
        yield start, commit_stop, span_stop
        start = commit_stop
        block_stop = start + ctrl


def rolling_horizon(
    decomp: NetLoadDecomposition,
    battery: BatterySpec,
    cfg: DispatchConfig = DispatchConfig(),
    progress=None,
) -> DispatchSolution:
    """Schedule the battery over the full period window by window.

    The leading partial block before the first anchor gets its own window.
    Every window's LP looks ``control + prediction`` hours ahead from its
    start, truncated at the end of the data. ``progress`` is called with
    each :class:`WindowInfo` as it is committed.
    """
    total, dt = len(decomp), decomp.dt
    rl, sg = decomp.rl.values, decomp.sg.values
    ch, ds, dg, soc = (np.zeros(total) for _ in range(4))
    windows = []
    s = battery.initial_soc
    for k, (a, b, e) in enumerate(_windows(total, dt, decomp.start_time, cfg)):
        w = solve_window(rl[a:e], sg[a:e], battery, cfg, s, dt, window=k, start_index=a)
        m = b - a
        ch[a:b], ds[a:b], dg[a:b], soc[a:b] = w.ch[:m], w.ds[:m], w.dg[:m], w.soc[:m]
        s = float(soc[b - 1])
        info = WindowInfo(k, a, b, e, w.p_max)
        windows.append(info)
        if progress is not None:
            progress(info)
    sol = DispatchSolution(ch, ds, dg, soc, tuple(windows), 0.0, 0.0, battery, battery.initial_soc)
    mpi, mpe = extract_mpi_mpe(sol, decomp)
    return DispatchSolution(ch, ds, dg, soc, tuple(windows), mpi, mpe, battery, battery.initial_soc)


def solve_full_period(
    decomp: NetLoadDecomposition, battery: BatterySpec, cfg: DispatchConfig = DispatchConfig()
) -> DispatchSolution:
    """One LP over the whole period (no rolling horizon); used as a reference."""
    w = solve_window(decomp.rl, decomp.sg, battery, cfg, battery.initial_soc)
    info = WindowInfo(0, 0, len(decomp), len(decomp), w.p_max)
    sol = DispatchSolution(w.ch, w.ds, w.dg, w.soc, (info,), 0.0, 0.0, battery, battery.initial_soc)
    mpi, mpe = extract_mpi_mpe(sol, decomp)
    return DispatchSolution(w.ch, w.ds, w.dg, w.soc, (info,), mpi, mpe, battery, battery.initial_soc)
