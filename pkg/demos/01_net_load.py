# PV-only analysis of a synthetic community: net load, duration curve and
# static curtailment. Run: python3 demos/01_net_load.py

import numpy as np

from mpimpe import PvSize, case1_metrics, curtailment_cap, decompose, duration_curve, energy_size_pct, pv_generation
from mpimpe.synth import generate, preset

# one year of hourly load and PV output per MW_p
load, unit = generate(preset("summer-afternoon-peak"))
print(f"peak load {load.peak:.2f} MW, demand {load.annual_energy / 1e3:.1f} GWh")
print(f"PV yield {unit.unit_annual_energy:.0f} MWh per MW_p")
print(f"100 % energy size = {energy_size_pct(load, unit):.0f} % of peak load")

# split net load into residual load and surplus for a few PV sizes
for size in (0, 100, 200, 300):
    d = decompose(load.series, pv_generation(unit, PvSize.for_load(load, size)))
    m = case1_metrics(d)
    print(f"PV {size:3d} %: MRL {m.mrl:6.2f} MW at {d.rl.timestamp(m.mrl_time_index):%b %d %H:%M}, "
          f"MSG {m.msg:6.2f} MW")

# the duration curve at 200 %: hours with import vs export
d = decompose(load.series, pv_generation(unit, PvSize.for_load(load, 200)))
dc = duration_curve(d)
print("hours importing", int((dc.sorted_net_load > 0).sum() * dc.dt),
      "exporting", int((dc.sorted_net_load < 0).sum() * dc.dt))
print("deciles (MW):", np.round(np.quantile(dc.sorted_net_load, np.linspace(0, 1, 11)), 1))

# a feed-in cap that cuts at most 5 % of the PV energy
pv = pv_generation(unit, PvSize.for_load(load, 200))
cut = curtailment_cap(d, pv.energy, 0.05)
print(f"cap {cut.cap:.2f} MW (MSG was {dc.msg:.2f}), curtailed {cut.curtailed_energy:.0f} MWh "
      f"= {cut.fraction_of_pv_energy:.1%} of PV energy")
