import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raildelay.data import (CSV_HEADER, FEATURE_COLUMNS, DataError, Dataset, DelayKind,
                            FeatureMatrix, MeasurementRecord, Mode, OperatorKpi,
                            check_columns, parse_csv, read_dataset, region_split,
                            save_dataset, time_split, to_features, write_csv)

HEADER = ",".join(CSV_HEADER)
KPIS = "-80,-10,15,-85,-11,12,-90,-12,10"


def row(ts, mode="PR", delays=("70.5", "", "48.2", "88", "56.1"), lon="25.0", speed="80"):
    return f"{ts},60.1,{lon},12.5,{speed},{KPIS},{mode}," + ",".join(delays)


def make_record(ts, lon=25.0, speed=80.0, mode=Mode.PACKET_REPLICATION, delays=None):
    kpi = OperatorKpi(-80.0, -10.0, 15.0)
    if delays is None:
        delays = {DelayKind.TCP: 40.0 + ts}
        if ts % 10 == 0:
            delays[DelayKind.MOVEMENT_AUTHORITY] = 90.0
    return MeasurementRecord(float(ts), 60.0, lon, ts / 100, speed, (kpi, kpi, kpi),
                             delays, mode)


def test_delay_kind_constants():
    for kind in DelayKind:
        expected_interval = 10 if kind is DelayKind.MOVEMENT_AUTHORITY else 1
        expected_threshold = 1000.0 if kind is DelayKind.HTTP else 500.0
        assert kind.sampling_interval == expected_interval
        assert kind.critical_threshold == expected_threshold


def test_delay_kind_lookup_variants():
    assert DelayKind.from_key("PositionReport") is DelayKind.POSITION_REPORT
    assert DelayKind.from_key("Tcp") is DelayKind.TCP
    assert DelayKind.from_key("ma") is DelayKind.MOVEMENT_AUTHORITY
    with pytest.raises(DataError):
        DelayKind.from_key("latency")


def test_parse_single_pr_row():
    ds = parse_csv(HEADER + "\n" + row(0, delays=("70.5", "95", "48.2", "88", "56.1")))
    assert len(ds) == 1
    assert ds.mode is Mode.PACKET_REPLICATION
    assert len(ds[0].delays) == 5


def test_empty_ma_field_is_absent():
    ds = parse_csv(HEADER + "\n" + row(3))
    assert DelayKind.MOVEMENT_AUTHORITY not in ds[0].delays
    assert ds[0].delays[DelayKind.TCP] == 48.2


def test_repeated_timestamp_reports_line():
    text = "\n".join([HEADER, row(5), row(5)])
    with pytest.raises(DataError, match="non-monotonic timestamp at line 3"):
        parse_csv(text)


@pytest.mark.parametrize("bad, message", [
    (row(1, mode="XX"), "unknown mode"),
    (row(1).replace("-80,", "-30,", 1), "rsrp"),
    (row(1).replace(",80,", ",-5,", 1), "negative speed"),
    (row(1, delays=("70", "95", "48", "88", "56")), "movement authority"),
    (row(1, delays=("0", "", "48", "88", "56")), "positive"),
    ("1,2,3", "line 2"),
    (row(1).replace("60.1", "abc"), "line 2: cannot parse lat"),
])
def test_parse_errors(bad, message):
    with pytest.raises(DataError, match=message):
        parse_csv(HEADER + "\n" + bad)


def test_mixed_modes_rejected():
    with pytest.raises(DataError, match="line 3"):
        parse_csv("\n".join([HEADER, row(1), row(2, mode="BQ")]))


def test_bad_header():
    with pytest.raises(DataError, match="header"):
        parse_csv("timestamp,lat\n")


def test_empty_dataset_writes_header_only():
    text = write_csv(Dataset())
    assert text == HEADER + "\n"
    assert len(parse_csv(text)) == 0


def test_single_record_round_trip():
    ds = Dataset((make_record(0),))
    text = write_csv(ds)
    assert len(text.splitlines()) == 2
    assert parse_csv(text) == ds


def test_round_trip_simulated_records(small_run):
    for ds in (small_run.bq, small_run.pr):
        sub = ds.subset(ds.records[:1000])
        back = parse_csv(write_csv(sub))
        assert back.mode is sub.mode
        for a, b in zip(back.records, sub.records):
            assert a == b


def test_file_round_trip(tmp_path, small_run):
    path = tmp_path / "pr.csv"
    save_dataset(small_run.pr, path)
    assert read_dataset(path) == small_run.pr


finite = st.floats(min_value=0.01, max_value=1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=1, max_size=20), st.floats(-179, 179))
def test_round_trip_arbitrary_floats(delays, lon):
    recs = tuple(make_record(i, lon=lon, delays={DelayKind.HTTP: d}) for i, d in enumerate(delays))
    ds = Dataset(recs)
    assert parse_csv(io.StringIO(write_csv(ds))) == ds


def test_to_features_ma_rows():
    ds = Dataset(tuple(make_record(t) for t in range(10)))
    X, y, idx = to_features(ds, DelayKind.MOVEMENT_AUTHORITY)
    assert X.shape == (1, 10)
    assert list(idx) == [0]


def test_to_features_speed_column():
    speeds = np.arange(10) * 7.5
    ds = Dataset(tuple(make_record(t, speed=s) for t, s in enumerate(speeds)))
    X, y, idx = to_features(ds, DelayKind.TCP)
    assert X.shape == (10, 10)
    assert X.columns == FEATURE_COLUMNS
    np.testing.assert_array_equal(X.values[:, 9], speeds)
    np.testing.assert_array_equal(y, 40.0 + np.arange(10))


def test_to_features_large_target_kept():
    ds = Dataset((make_record(0, delays={DelayKind.HTTP: 31569.19}),))
    _, y, _ = to_features(ds, DelayKind.HTTP)
    assert y[0] == 31569.19


def test_to_features_drops_missing_kpis_and_errors_when_empty():
    kpi = OperatorKpi(-80.0, -10.0, 15.0)
    gap = OperatorKpi(None, -10.0, 15.0)
    recs = (
        MeasurementRecord(0.0, 60, 25, 0, 10, (kpi, gap, kpi), {DelayKind.TCP: 40.0},
                          Mode.PACKET_REPLICATION),
        MeasurementRecord(1.0, 60, 25, 0, 10, (kpi, kpi, kpi), {DelayKind.TCP: 41.0},
                          Mode.PACKET_REPLICATION),
    )
    X, y, idx = to_features(Dataset(recs), DelayKind.TCP)
    assert list(idx) == [1]
    with pytest.raises(DataError, match="no records"):
        to_features(Dataset(recs), DelayKind.DNS)
    with pytest.raises(DataError):
        to_features(Dataset(), DelayKind.TCP)


def test_feature_matrix_rejects_nan_and_is_read_only():
    with pytest.raises(DataError):
        FeatureMatrix(np.full((1, 10), np.nan))
    with pytest.raises(DataError):
        FeatureMatrix(np.zeros((2, 9)))
    src = np.zeros((2, 10))
    fm = FeatureMatrix(src)
    assert not fm.values.flags.writeable
    src[0, 0] = 1.0  # caller's array stays writable and independent
    assert fm.values[0, 0] == 0.0


def test_check_columns():
    check_columns(FEATURE_COLUMNS, list(FEATURE_COLUMNS))
    with pytest.raises(DataError):
        check_columns(FEATURE_COLUMNS, FEATURE_COLUMNS[::-1])


@pytest.mark.parametrize("n, f, n_train", [(10, 0.7, 7), (2, 0.5, 1), (3, 0.01, 1), (3, 0.99, 2)])
def test_time_split_sizes(n, f, n_train):
    ds = Dataset(tuple(make_record(t) for t in range(n)))
    train, test = time_split(ds, f)
    assert len(train) == n_train
    assert len(test) == n - n_train
    assert max(r.timestamp for r in train) < min(r.timestamp for r in test)
    assert train.records + test.records == ds.records


def test_time_split_errors():
    with pytest.raises(DataError):
        time_split(Dataset((make_record(0),)), 0.5)
    ds = Dataset(tuple(make_record(t) for t in range(4)))
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DataError):
            time_split(ds, bad)


def test_region_split_definition():
    ds = Dataset((make_record(0, lon=24.0), make_record(1, lon=28.0)))
    east, west = region_split(ds, 26.0)
    assert [r.lon for r in west] == [24.0]
    assert [r.lon for r in east] == [28.0]
    east, west = region_split(ds, 20.0)
    assert len(west) == 0 and len(east) == 2


def test_region_split_partitions_simulated_run(small_run):
    east, west = region_split(small_run.pr, 25.5)
    assert len(east) + len(west) == len(small_run.pr)
    merged = sorted(east.records + west.records, key=lambda r: r.timestamp)
    assert tuple(merged) == small_run.pr.records
