from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpimpe import (
    LoadProfile,
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
from mpimpe.errors import (
    IncompatibleResolution,
    InvalidSpec,
    MalformedRow,
    MisalignedSeries,
    NegativeValue,
    NonUniformSpacing,
    ZeroPeak,
    ZeroYield,
)

T0 = datetime(2017, 1, 1)
finite = st.floats(-50, 50, allow_nan=False)


def series(values, dt=1.0, start=T0):
    return TimeSeries(start, dt, np.asarray(values, float))


def write_rows(path, rows, header="timestamp,value"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


# -- TimeSeries ----------------------------------------------------------------


def test_series_is_read_only_copy():
    raw = np.array([1.0, 2.0])
    s = series(raw)
    raw[0] = 9.0
    assert s.values[0] == 1.0
    with pytest.raises(ValueError):
        s.values[0] = 3.0


@pytest.mark.parametrize("values, dt", [([], 1.0), ([1.0, np.nan], 1.0), ([1.0], 0.0), (np.ones(8785), 1.0)])
def test_series_rejects_bad_input(values, dt):
    with pytest.raises(InvalidSpec):
        series(values, dt)


def test_leap_year_fits():
    assert len(series(np.ones(8784))) == 8784


def test_timestamps_and_energy():
    s = series([2.0, 4.0, 6.0, 8.0], dt=0.25)
    assert s.timestamp(3) == T0 + timedelta(minutes=45)
    assert s.energy == pytest.approx(5.0)
    assert s.duration_h == 1.0


# -- CSV ingestion -------------------------------------------------------------


def test_csv_round_trip_is_exact(tmp_path, rng):
    s = series(rng.random(48) * 30, dt=0.25)
    write_csv(s, tmp_path / "a.csv")
    assert ingest_csv(tmp_path / "a.csv") == s


def test_csv_infers_hourly(tmp_path):
    p = write_rows(tmp_path / "h.csv", ["2017-03-01T00:00:00,1", "2017-03-01T01:00:00,2"])
    s = ingest_csv(p)
    assert s.dt == 1.0 and list(s.values) == [1.0, 2.0]


def test_csv_accepts_utc_suffix_and_extra_columns(tmp_path):
    p = write_rows(tmp_path / "z.csv", ["2017-03-01T00:00:00Z,1,x", "2017-03-01T01:00:00Z,2,y"],
                   header="timestamp,value,note")
    assert len(ingest_csv(p)) == 2


def test_csv_gap_names_row(tmp_path):
    rows = [f"2017-01-01T{h:02d}:00:00,1" for h in (0, 1, 2, 4)]
    with pytest.raises(NonUniformSpacing) as e:
        ingest_csv(write_rows(tmp_path / "g.csv", rows))
    assert e.value.row == 3 and "row 3" in str(e.value)


def test_csv_duplicate_timestamp(tmp_path):
    rows = ["2017-01-01T00:00:00,1", "2017-01-01T01:00:00,1", "2017-01-01T01:00:00,1"]
    with pytest.raises(NonUniformSpacing) as e:
        ingest_csv(write_rows(tmp_path / "d.csv", rows))
    assert e.value.row == 2


@pytest.mark.parametrize("bad, exc", [
    ("2017-01-01T02:00:00,abc", MalformedRow),
    ("yesterday,1", MalformedRow),
    ("2017-01-01T02:00:00,-1", NegativeValue),
    ("2017-01-01T02:00:00,1,2", MalformedRow),
    ("2017-01-01T02:00:00,inf", MalformedRow),
])
def test_csv_bad_row(tmp_path, bad, exc):
    rows = ["2017-01-01T00:00:00,1", "2017-01-01T01:00:00,1", bad]
    with pytest.raises(exc) as e:
        ingest_csv(write_rows(tmp_path / "b.csv", rows))
    assert e.value.row == 2


def test_csv_bad_header_and_resolution(tmp_path):
    with pytest.raises(MalformedRow):
        ingest_csv(write_rows(tmp_path / "h.csv", ["2017-01-01T00:00:00,1"], header="time,power"))
    rows = ["2017-01-01T00:00:00,1", "2017-01-01T00:30:00,1"]
    with pytest.raises(IncompatibleResolution):
        ingest_csv(write_rows(tmp_path / "r.csv", rows))


def test_csv_negative_allowed_when_asked(tmp_path):
    rows = ["2017-01-01T00:00:00,-1", "2017-01-01T01:00:00,1"]
    assert ingest_csv(write_rows(tmp_path / "n.csv", rows), nonnegative=False).values[0] == -1


# -- profiles --------------------------------------------------------------------


def test_profile_validation():
    with pytest.raises(NegativeValue):
        LoadProfile(series([1.0, -0.1]))
    with pytest.raises(InvalidSpec):
        PvUnitProfile(series([0.0, 1.3]))
    with pytest.raises(InvalidSpec):
        PvSize(-1, 10)


def test_scale_to_peak_hits_target_exactly():
    load = LoadProfile(series([3.0, 7.0, 7.0, 1.0]))
    scaled = scale_to_peak(load, 36.22)
    assert scaled.peak == 36.22
    assert scaled.series.values[0] == pytest.approx(3 * 36.22 / 7)
    with pytest.raises(ZeroPeak):
        scale_to_peak(LoadProfile(series([0.0, 0.0])), 1.0)


def test_resample_conserves_energy(rng):
    s = series(rng.random(96), dt=0.25)
    h = resample_to(s, 1.0)
    assert len(h) == 24 and h.energy == pytest.approx(s.energy)
    back = resample_to(h, 0.25)
    assert back.energy == pytest.approx(s.energy)
    with pytest.raises(IncompatibleResolution):
        resample_to(series(np.ones(5), dt=0.25), 1.0)


def test_energy_size_pct_formula():
    # demand 2 MWh/h with peak 4, unit yield 0.25 MWh/MWp per hour -> 8 MWp -> 200 %
    load = LoadProfile(series([0.0, 4.0, 2.0, 2.0]))
    pv = PvUnitProfile(series([0.0, 0.5, 0.5, 0.0]))
    assert energy_size_pct(load, pv) == pytest.approx(200.0)
    with pytest.raises(ZeroYield):
        energy_size_pct(load, PvUnitProfile(series(np.zeros(4))))


def test_pv_generation_scales_with_peak():
    load = LoadProfile(series([10.0, 20.0]))
    pv = pv_generation(PvUnitProfile(series([0.5, 1.0])), PvSize.for_load(load, 150))
    assert list(pv.values) == [15.0, 30.0]


def test_decompose_rejects_misaligned():
    with pytest.raises(MisalignedSeries):
        decompose(series([1.0, 2.0]), series([1.0, 2.0], start=T0 + timedelta(hours=1)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 50), st.floats(0, 50)), min_size=1, max_size=40))
def test_decomposition_identities(pairs):
    load, pv = (series(v) for v in zip(*pairs))
    d = decompose(load, pv)
    rl, sg = d.rl.values, d.sg.values
    assert np.all(rl >= 0) and np.all(sg >= 0)
    assert np.all(np.minimum(rl, sg) == 0)
    np.testing.assert_allclose(rl - sg, load.values - pv.values, atol=1e-12)
