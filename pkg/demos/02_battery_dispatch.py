# Rolling-horizon battery schedule for three weeks of a synthetic summer.
# Run: python3 demos/02_battery_dispatch.py

import numpy as np

from mpimpe import BatterySpec, PvSize, battery_capacity, case1_metrics, decompose, pv_generation, rolling_horizon
from mpimpe.synth import generate, preset

load, unit = generate(preset("summer-afternoon-peak", days=21, start_day=210))
size, ratio = 250.0, 2.5  # PV in % of peak load, battery kWh per kW_PV
d = decompose(load.series, pv_generation(unit, PvSize.for_load(load, size)))
cap = battery_capacity(load.peak, size, ratio)
print(f"PV {size:g} % of {load.peak:.1f} MW, battery {cap:.0f} MWh")

before = case1_metrics(d)
sol = rolling_horizon(d, BatterySpec(cap), progress=lambda w: print(
    f"  window {w.index:2d}: steps {w.start:3d}-{w.commit_stop:3d} (looks to {w.span_stop}), p_max {w.p_max:.2f} MW"))

print(f"import peak {before.mrl:.2f} -> {sol.mpi:.2f} MW")
print(f"export peak {before.msg:.2f} -> {sol.mpe:.2f} MW")

# how the battery was used
print(f"SOC range {sol.soc.min():.0f}-{sol.soc.max():.0f} MWh of {cap:.0f}")
print(f"charged {sol.ch.sum():.0f} MWh, to load {sol.ds.sum():.0f} MWh, to grid {sol.dg.sum():.0f} MWh")
busiest = int(np.argmax(sol.ch))
print(f"largest charge {sol.ch[busiest]:.1f} MW at {d.rl.timestamp(busiest):%b %d %H:%M}")
