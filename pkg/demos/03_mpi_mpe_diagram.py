# MPI-MPE diagrams for the two synthetic communities, with and without a
# battery. A plot is written if matplotlib is installed.
# Run: python3 demos/03_mpi_mpe_diagram.py [out.png]

import os
import sys

from mpimpe import SweepSpec, run_sweep
from mpimpe.synth import generate, preset

sizes = tuple(range(0, 481, 40))
ratios = (0.0, 2.5, 4.5)
jobs = int(os.environ.get("MPIMPE_JOBS", "1"))
results = {}
for name, day in (("winter-evening-peak", 8), ("summer-afternoon-peak", 218)):
    # two weeks around each community's peak season keep this quick
    load, unit = generate(preset(name, days=14, start_day=day))
    results[name] = run_sweep(load, unit, SweepSpec(sizes, ratios), jobs=jobs)
    print(f"\n{name} (peak {load.peak:.1f} MW)")
    for r, at in results[name].avoided_transmission().items():
        print(f"  {r:3.1f} kWh/kW: degree {at.degree_mw:5.2f} MW ({at.degree_pct:4.1f} %) "
              f"at {at.argmin_pv_pct:3.0f} %, range up to {at.range_pct:5.1f} %")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(0)

fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
for ax, (name, res) in zip(axes, results.items()):
    for r in ratios:
        c = res.curve(r)
        x = [p.pv_size_pct for p in c]
        (line,) = ax.plot(x, [p.mpi for p in c], label=f"MPI {r:g}")
        ax.plot(x, [p.mpe for p in c], ls=":", color=line.get_color(), label=f"MPE {r:g}")
    ax.axhline(res.curve(0.0)[0].mpi, color="k", lw=0.8)
    ax.set_title(name)
    ax.set_xlabel("PV size (% of peak load)")
axes[0].set_ylabel("MW")
axes[1].legend(fontsize=7, ncol=2)
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "mpi_mpe.png", dpi=120)
