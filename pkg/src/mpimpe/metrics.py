"""PV-only analysis: duration curves, MRL/MSG and static curtailment."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidFraction
from .profiles import NetLoadDecomposition

CAP_TOL = 1e-6


@dataclass(frozen=True)
class Case1Metrics:
    mrl: float
    msg: float
    mrl_time_index: int
    msg_time_index: int

    @property
    def grid_interaction(self) -> float:
        return max(self.mrl, self.msg)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class DurationCurve:
    sorted_net_load: np.ndarray
    dt: float

    @property
    def mrl(self) -> float:
        return max(float(self.sorted_net_load[0]), 0.0)

    @property
    def msg(self) -> float:
        return max(-float(self.sorted_net_load[-1]), 0.0)

    def hours(self) -> np.ndarray:
        """Cumulative duration (h) at which each sorted value is reached."""
        return np.arange(1, self.sorted_net_load.size + 1) * self.dt

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "net_load_mw"])
            for rank, v in enumerate(self.sorted_net_load, start=1):
                w.writerow([rank, f"{v:.6f}"])


@dataclass(frozen=True)
class CurtailmentResult:
    cap: float
    curtailed_energy: float
    fraction_of_pv_energy: float

    def apply(self, decomp: NetLoadDecomposition) -> NetLoadDecomposition:
        return decomp.with_surplus_cap(self.cap)

    def to_dict(self) -> dict:
        return asdict(self)


def case1_metrics(decomp: NetLoadDecomposition) -> Case1Metrics:
    rl, sg = decomp.rl.values, decomp.sg.values
    i_rl = int(np.argmax(rl))
    i_sg = int(np.argmax(sg))
    return Case1Metrics(float(rl[i_rl]), float(sg[i_sg]), i_rl, i_sg)


def duration_curve(decomp: NetLoadDecomposition) -> DurationCurve:
    net = np.sort(decomp.net)[::-1].copy()
    return DurationCurve(net, decomp.dt)


def curtailed_energy(sg: np.ndarray, cap: float, dt: float) -> float:
    return float(np.maximum(sg - cap, 0.0).sum() * dt)


def curtailment_cap(
    decomp: NetLoadDecomposition, pv_annual_energy: float, fraction: float
) -> CurtailmentResult:
    """Lowest feed-in cap whose curtailed energy stays within the budget.

    The budget is ``fraction * pv_annual_energy``. The cap is found by
    bisection over ``[0, MSG]`` and is accurate to ``CAP_TOL`` MW, rounded
    toward the feasible (higher-cap) side.
    """
    if not 0.0 <= fraction < 1.0:
        raise InvalidFraction(f"fraction must lie in [0, 1), got {fraction}")
    if pv_annual_energy <= 0:
        raise InvalidFraction("PV energy must be positive")
    sg = decomp.sg.values
    dt = decomp.dt
    budget = fraction * pv_annual_energy
    hi = float(sg.max())
    lo = 0.0
    if curtailed_energy(sg, lo, dt) <= budget:
        hi = lo
    while hi - lo > CAP_TOL:
        mid = 0.5 * (lo + hi)
        if curtailed_energy(sg, mid, dt) <= budget:
            hi = mid
        else:
            lo = mid
    energy = curtailed_energy(sg, hi, dt)
    return CurtailmentResult(hi, energy, energy / pv_annual_energy)
