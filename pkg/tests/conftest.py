import sys
from datetime import datetime
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mpimpe import NetLoadDecomposition, TimeSeries  # noqa: E402

T0 = datetime(2017, 1, 1)


def decomp_from_net(net, dt=1.0, start=T0):
    net = np.asarray(net, float)
    return NetLoadDecomposition(
        TimeSeries(start, dt, np.maximum(net, 0.0)), TimeSeries(start, dt, np.maximum(-net, 0.0))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def synthetic_case(name="summer-afternoon-peak", days=7, start_day=218, pv_pct=200.0, seed=None, dt=1.0):
    """(load, unit_pv, decomposition) for a preset slice."""
    from mpimpe import PvSize, decompose, pv_generation
    from mpimpe.synth import generate, preset

    overrides = {"days": days, "start_day": start_day, "dt": dt}
    if seed is not None:
        overrides["cloud_seed"] = seed
    load, unit = generate(preset(name, **overrides))
    pv = pv_generation(unit, PvSize.for_load(load, pv_pct))
    return load, unit, decompose(load.series, pv)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s[2:4])):
        terminalreporter.write_line(line)
