"""Command-line entry point: ``mpimpe {synth,case1,dispatch,sweep}``.

Exit codes: 0 success, 2 invalid input, 3 LP failure in a dispatch window,
4 every sweep scenario failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .dispatch import BatterySpec, DispatchConfig, rolling_horizon
from .errors import InputError, InfeasibleSpec, WindowSolveError
from .lp import SolverOptions
from .metrics import case1_metrics, curtailment_cap, duration_curve
from .profiles import LoadProfile, PvSize, PvUnitProfile, decompose, ingest_csv, pv_generation, write_csv
from .sweep import DEFAULT_RATIOS, SweepSpec, battery_capacity, run_sweep
from .synth import PRESETS, generate, preset

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_SWEEP = 4


class _Fail(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _r6(v: float) -> float:
    return round(float(v), 6)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, command: str, inputs, config: dict) -> None:
    _write_json(out / "manifest.json", {
        "tool": "mpimpe",
        "version": __version__,
        "command": command,
        "inputs": [{"path": str(p), "sha256": _sha256(Path(p))} for p in inputs],
        "config": config,
    })


def _load_inputs(load_path: str, pv_path: str):
    profiles = []
    for path, kind in ((load_path, LoadProfile), (pv_path, PvUnitProfile)):
        try:
            profiles.append(kind(ingest_csv(path)))
        except FileNotFoundError:
            raise _Fail(EXIT_INPUT, "FileNotFound", f"{path}: no such file", file=path) from None
        except InputError as exc:
            raise _Fail(EXIT_INPUT, type(exc).__name__, f"{path}: {exc}", file=path, row=exc.row) from None
    load, pv = profiles
    if not load.series.is_aligned(pv.series):
        raise _Fail(EXIT_INPUT, "MisalignedSeries", "load and PV profiles differ in start, interval or length")
    return load, pv


def _parse_sizes(text: str) -> tuple:
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        n = int(round((stop - start) / step))
        return tuple(start + i * step for i in range(n + 1))
    return tuple(float(v) for v in text.split(","))


def _fraction_arg(p):
    p.add_argument("--curtail-fraction", type=float, nargs="?", const=0.05, default=None,
                   help="static curtailment: share of PV energy that may be cut at the highest "
                        "surplus (flag alone means 0.05; omitted means no curtailment)")


def _dispatch_args(p):
    d = DispatchConfig()
    b = BatterySpec(0.0)
    p.add_argument("--lambda1", type=float, default=d.lambda1,
                   help="objective reward per MW of self-consumption discharge (default %(default)g)")
    p.add_argument("--lambda2", type=float, default=d.lambda2,
                   help="objective penalty per MW of discharge to the grid (default %(default)g)")
    p.add_argument("--control-h", type=float, default=d.control_horizon_h,
                   help="committed hours per rolling window (default %(default)g)")
    p.add_argument("--prediction-h", type=float, default=d.prediction_horizon_h,
                   help="look-ahead hours beyond the control block (default %(default)g)")
    p.add_argument("--anchor-hour", type=float, default=d.window_anchor_hour,
                   help="clock hour at which control blocks start (default %(default)g)")
    p.add_argument("--soc-min", type=float, default=b.soc_min_frac,
                   help="lower state-of-charge bound as a fraction of capacity (default %(default)g)")
    p.add_argument("--soc-max", type=float, default=b.soc_max_frac,
                   help="upper state-of-charge bound as a fraction of capacity (default %(default)g)")
    p.add_argument("--soc-init", type=float, default=b.initial_soc_frac,
                   help="initial state of charge as a fraction of capacity (default %(default)g)")
    p.add_argument("--solver", choices=("simplex", "highs"), default="simplex",
                   help="bundled simplex or scipy's HiGHS (default %(default)s)")


def _dispatch_config(args) -> tuple[DispatchConfig, BatterySpec]:
    try:
        cfg = DispatchConfig(args.lambda1, args.lambda2, args.control_h, args.prediction_h,
                             args.anchor_hour, SolverOptions(method=args.solver))
        battery = BatterySpec(0.0, args.soc_min, args.soc_max, args.soc_init)
    except InputError as exc:
        raise _Fail(EXIT_INPUT, type(exc).__name__, str(exc)) from None
    return cfg, battery


def _config_dict(cfg: DispatchConfig, battery: BatterySpec) -> dict:
    return {
        "lambda1": cfg.lambda1, "lambda2": cfg.lambda2,
        "control_horizon_h": cfg.control_horizon_h, "prediction_horizon_h": cfg.prediction_horizon_h,
        "window_anchor_hour": cfg.window_anchor_hour, "solver": cfg.solver.method,
        "soc_min_frac": battery.soc_min_frac, "soc_max_frac": battery.soc_max_frac,
        "initial_soc_frac": battery.initial_soc_frac,
    }


def _scenario_decomp(load, pv_unit, size_pct, fraction):
    pv = pv_generation(pv_unit, PvSize.for_load(load, size_pct))
    decomp = decompose(load.series, pv)
    curtail = None
    msg_before = float(decomp.sg.values.max())
    if fraction is not None and pv.energy > 0:
        try:
            curtail = curtailment_cap(decomp, pv.energy, fraction)
        except InputError as exc:
            raise _Fail(EXIT_INPUT, type(exc).__name__, str(exc)) from None
        decomp = curtail.apply(decomp)
    return decomp, curtail, msg_before


# -- commands ----------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    overrides = {"days": args.days, "cloud_seed": args.seed, "dt": args.dt}
    if args.start_day is not None:
        overrides["start_day"] = args.start_day
    try:
        spec = preset(args.preset, **overrides)
        load, pv = generate(spec)
    except InputError as exc:
        raise _Fail(EXIT_INPUT, type(exc).__name__, str(exc)) from None
    write_csv(load.series, out / "load.csv")
    write_csv(pv.series, out / "pv_unit.csv")
    cfg = {"preset": args.preset}
    cfg.update({k: v for k, v in spec.__dict__.items()})
    _write_manifest(out, "synth", [], cfg)
    return 0


def cmd_case1(args) -> int:
    load, pv_unit = _load_inputs(args.load, args.pv_unit)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    decomp, curtail, msg_before = _scenario_decomp(load, pv_unit, args.pv_size_pct, args.curtail_fraction)
    m = case1_metrics(decomp)
    payload = {
        "pv_size_pct": _r6(args.pv_size_pct),
        "pv_nominal_mw": _r6(PvSize.for_load(load, args.pv_size_pct).nominal_mw),
        "load_peak_mw": _r6(load.peak),
        "mrl_mw": _r6(m.mrl),
        "msg_mw": _r6(m.msg),
        "mrl_time_index": m.mrl_time_index,
        "msg_time_index": m.msg_time_index,
        "mrl_timestamp": decomp.rl.timestamp(m.mrl_time_index).isoformat(),
        "msg_timestamp": decomp.rl.timestamp(m.msg_time_index).isoformat(),
        "grid_interaction_mw": _r6(m.grid_interaction),
        "curtailment": None if curtail is None else {
            "fraction": _r6(args.curtail_fraction),
            "cap_mw": _r6(curtail.cap),
            "msg_before_mw": _r6(msg_before),
            "curtailed_energy_mwh": _r6(curtail.curtailed_energy),
            "fraction_of_pv_energy": _r6(curtail.fraction_of_pv_energy),
        },
    }
    _write_json(out / "case1.json", payload)
    duration_curve(decomp).to_csv(out / "duration_curve.csv")
    _write_manifest(out, "case1", [args.load, args.pv_unit],
                    {"pv_size_pct": args.pv_size_pct, "curtail_fraction": args.curtail_fraction})
    return 0


def cmd_dispatch(args) -> int:
    load, pv_unit = _load_inputs(args.load, args.pv_unit)
    cfg, battery = _dispatch_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    decomp, _, _ = _scenario_decomp(load, pv_unit, args.pv_size_pct, args.curtail_fraction)
    capacity = battery_capacity(load.peak, args.pv_size_pct, args.battery_ratio)
    try:
        sol = rolling_horizon(decomp, battery.with_capacity(capacity), cfg)
    except (WindowSolveError, InfeasibleSpec) as exc:
        raise _Fail(EXIT_SOLVER, type(exc).__name__, str(exc), window=getattr(exc, "window", None)) from None
    sol.to_csv(out / "dispatch.csv", decomp)
    summary = sol.summary()
    summary.update({"pv_size_pct": _r6(args.pv_size_pct), "battery_ratio": _r6(args.battery_ratio)})
    _write_json(out / "summary.json", summary)
    config = _config_dict(cfg, battery)
    config.update({"pv_size_pct": args.pv_size_pct, "battery_ratio": args.battery_ratio,
                   "curtail_fraction": args.curtail_fraction})
    _write_manifest(out, "dispatch", [args.load, args.pv_unit], config)
    return 0


def cmd_sweep(args) -> int:
    load, pv_unit = _load_inputs(args.load, args.pv_unit)
    cfg, battery = _dispatch_config(args)
    try:
        spec = SweepSpec(_parse_sizes(args.sizes), _parse_sizes(args.ratios), args.curtail_fraction,
                         battery, refine=args.refine)
    except (InputError, ValueError) as exc:
        raise _Fail(EXIT_INPUT, type(exc).__name__, str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(done, total, outcome):
        state = "failed" if hasattr(outcome, "error") else "ok"
        print(f"[{done}/{total}] pv={outcome.pv_size_pct:g}% ratio={outcome.battery_ratio:g} {state}",
              file=sys.stderr)

    result = run_sweep(load, pv_unit, spec, cfg, jobs=args.jobs, progress=progress)
    result.to_csv(out / "diagram.csv")
    result.write_summary(out / "avoided_transmission.json")
    config = _config_dict(cfg, battery)
    config.update({"pv_sizes_pct": list(spec.pv_sizes_pct), "battery_ratios": list(spec.battery_ratios),
                   "curtail_fraction": spec.curtail_fraction, "refine": spec.refine})
    _write_manifest(out, "sweep", [args.load, args.pv_unit], config)
    for f in result.failures:
        print(f"scenario pv={f.pv_size_pct:g}% ratio={f.battery_ratio:g} failed: {f.error}", file=sys.stderr)
    if not result.points:
        raise _Fail(EXIT_SWEEP, "SweepFailed", "every scenario failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpimpe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--json-errors", action="store_true", help="emit errors on stderr as JSON lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic load and PV unit profiles")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--seed", type=int, default=0, help="cloud process seed")
    p.add_argument("--start-day", type=int, default=None, help="day of year of the first sample")
    p.add_argument("--dt", type=float, default=1.0, choices=(0.25, 1.0))
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_synth)

    def common(p):
        p.add_argument("load", help="load CSV (timestamp,value in MW)")
        p.add_argument("pv_unit", help="PV output per MW_p CSV (timestamp,value)")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("case1", help="PV-only maxima and net-load duration curve")
    common(p)
    p.add_argument("--pv-size-pct", type=float, required=True, help="PV capacity in percent of peak load")
    _fraction_arg(p)
    p.set_defaults(func=cmd_case1)

    p = sub.add_parser("dispatch", help="rolling-horizon battery schedule for one scenario")
    common(p)
    p.add_argument("--pv-size-pct", type=float, required=True, help="PV capacity in percent of peak load")
    p.add_argument("--battery-ratio", type=float, required=True, help="battery kWh per kW of PV")
    _fraction_arg(p)
    _dispatch_args(p)
    p.set_defaults(func=cmd_dispatch)

    p = sub.add_parser("sweep", help="MPI-MPE diagram over PV sizes and battery ratios")
    common(p)
    p.add_argument("--sizes", default="0:480:10", help="start:stop:step or comma list (default %(default)s)")
    p.add_argument("--ratios", default=",".join(f"{r:g}" for r in DEFAULT_RATIOS),
                   help="comma list of kWh per kW_PV (default %(default)s)")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("MPIMPE_JOBS", "1")),
                   help="worker processes (default $MPIMPE_JOBS or 1)")
    p.add_argument("--refine", action="store_true", help="bisect PV size around the MPI/MPE crossing")
    _fraction_arg(p)
    _dispatch_args(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        if args.json_errors:
            record = {"error": exc.kind, "message": str(exc), "exit_code": exc.code}
            record.update({k: v for k, v in exc.extra.items() if v is not None})
            print(json.dumps(record, sort_keys=True), file=sys.stderr)
        else:
            print(f"mpimpe {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
