"""MPI-MPE analysis of avoided transmission for communities with PV and batteries."""

from .dispatch import (
    BatterySpec,
    DispatchConfig,
    DispatchSolution,
    build_window_lp,
    extract_mpi_mpe,
    rolling_horizon,
    solve_full_period,
)
from .errors import MpiMpeError
from .metrics import Case1Metrics, case1_metrics, curtailment_cap, duration_curve
from .profiles import (
    LoadProfile,
    NetLoadDecomposition,
    PvSize,
    PvUnitProfile,
    TimeSeries,
    decompose,
    energy_size_pct,
    ingest_csv,
    pv_generation,
    resample_to,
    scale_to_peak,
    write_csv,
)
from .sweep import (
    AvoidedTransmission,
    MpiMpePoint,
    SweepSpec,
    avoided_transmission,
    battery_capacity,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AvoidedTransmission",
    "BatterySpec",
    "Case1Metrics",
    "DispatchConfig",
    "DispatchSolution",
    "LoadProfile",
    "MpiMpeError",
    "MpiMpePoint",
    "NetLoadDecomposition",
    "PvSize",
    "PvUnitProfile",
    "SweepSpec",
    "TimeSeries",
    "avoided_transmission",
    "battery_capacity",
    "build_window_lp",
    "case1_metrics",
    "curtailment_cap",
    "decompose",
    "duration_curve",
    "energy_size_pct",
    "extract_mpi_mpe",
    "ingest_csv",
    "pv_generation",
    "resample_to",
    "rolling_horizon",
    "run_sweep",
    "scale_to_peak",
    "solve_full_period",
    "write_csv",
]
