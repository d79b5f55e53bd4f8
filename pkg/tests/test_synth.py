import numpy as np
import pytest

from mpimpe.errors import InvalidSpec
from mpimpe.synth import PRESETS, cloud_factor, generate, preset


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_deterministic(name):
    a, b = generate(preset(name, days=20)), generate(preset(name, days=20))
    assert a[0].series == b[0].series and a[1].series == b[1].series


def test_seed_changes_clouds_only():
    l0, p0 = generate(preset("winter-evening-peak", days=5, cloud_seed=0))
    l1, p1 = generate(preset("winter-evening-peak", days=5, cloud_seed=1))
    assert l0.series == l1.series and not np.array_equal(p0.series.values, p1.series.values)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_pv_zero_at_night_and_bounded(name):
    load, pv = generate(preset(name))
    hours = np.arange(len(pv.series)) % 24
    assert np.all(pv.series.values[(hours < 4) | (hours >= 21)] == 0)
    assert pv.series.values.max() <= 1.2 and np.all(load.series.values >= 0)
    assert len(load.series) == 8760


def test_winter_preset_shape():
    load, pv = generate(preset("winter-evening-peak"))
    i = int(np.argmax(load.series.values))
    assert load.series.timestamp(i).month in (12, 1, 2) and load.series.timestamp(i).hour in (18, 19)
    v = pv.series.values.reshape(365, 24).sum(axis=1)
    assert v[150:240].mean() > 3 * np.r_[v[:45], v[-45:]].mean()


def test_summer_preset_shape():
    load, pv = generate(preset("summer-afternoon-peak"))
    i = int(np.argmax(load.series.values))
    assert load.series.timestamp(i).month in (7, 8, 9) and 14 <= load.series.timestamp(i).hour <= 16
    v = pv.series.values.reshape(365, 24).sum(axis=1)
    # much flatter over the year than the winter preset
    assert v[150:240].mean() < 2 * np.r_[v[:45], v[-45:]].mean()


def test_quarter_hour():
    load, pv = generate(preset("summer-afternoon-peak", days=2, dt=0.25))
    assert len(load.series) == 192 and load.series.dt == 0.25


def test_cloud_factor_range():
    c = cloud_factor(5000, 1.0, 7)
    assert c.min() >= 0.3 and c.max() <= 1.0 and np.corrcoef(c[:-1], c[1:])[0, 1] > 0.8


@pytest.mark.parametrize("kw", [{"days": 0}, {"days": 400}, {"dt": 0.5}, {"load_base_mw": 1.0},
                                {"pv_clearsky_peak_pu": 1.1}, {"cloud_persistence": 1.0}, {"start_day": 0}])
def test_invalid_spec(kw):
    with pytest.raises(InvalidSpec):
        generate(preset("winter-evening-peak", **kw))


def test_unknown_preset():
    with pytest.raises(InvalidSpec):
        preset("tropical")
