"""Measurement records, CSV persistence, feature assembly and dataset splits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "DataError",
    "DelayKind",
    "Mode",
    "OperatorKpi",
    "MeasurementRecord",
    "Dataset",
    "FeatureMatrix",
    "FEATURE_COLUMNS",
    "CSV_HEADER",
    "parse_csv",
    "write_csv",
    "read_dataset",
    "save_dataset",
    "to_features",
    "time_split",
    "region_split",
    "DEFAULT_BOUNDARY_LON",
    "DEFAULT_TRAIN_FRACTION",
]

DEFAULT_BOUNDARY_LON = 25.5
DEFAULT_TRAIN_FRACTION = 0.7

RSRP_RANGE = (-140.0, -40.0)
RSRQ_RANGE = (-20.0, -3.0)
SNR_RANGE = (-10.0, 40.0)


class DataError(ValueError):
    """Raised for malformed or invariant-violating measurement data."""


class DelayKind(Enum):
    """The five measured delay types.

    Each member carries its sampling interval (seconds), its critical
    threshold (milliseconds) and the CSV column holding its value.
    """

    POSITION_REPORT = ("position", 1, 500.0, "delay_position_ms", "Position Report")
    MOVEMENT_AUTHORITY = ("ma", 10, 500.0, "delay_ma_ms", "MA")
    TCP = ("tcp", 1, 500.0, "delay_tcp_ms", "TCP")
    HTTP = ("http", 1, 1000.0, "delay_http_ms", "HTTP")
    DNS = ("dns", 1, 500.0, "delay_dns_ms", "DNS")

    def __init__(self, key, sampling_interval, critical_threshold, column, label):
        self.key = key
        self.sampling_interval = sampling_interval
        self.critical_threshold = critical_threshold
        self.column = column
        self.label = label

    @classmethod
    def from_key(cls, key: str) -> "DelayKind":
        def norm(text):
            return "".join(ch for ch in text.lower() if ch.isalnum())

        wanted = norm(key)
        for kind in cls:
            if wanted in (kind.key, norm(kind.name), norm(kind.label)):
                return kind
        raise DataError(
            f"unknown delay kind {key!r}; expected one of "
            + ", ".join(k.key for k in cls)
        )

    def is_sampled_at(self, timestamp: float) -> bool:
        return timestamp % self.sampling_interval == 0


class Mode(Enum):
    BEST_QUALITY = ("BQ", "Best Quality")
    PACKET_REPLICATION = ("PR", "Packet Replication")
    GENERATED_PR = ("GEN_PR", "Generated PR Mode")

    def __init__(self, code, label):
        self.code = code
        self.label = label

    @classmethod
    def from_code(cls, code: str) -> "Mode":
        for mode in cls:
            if mode.code == code:
                return mode
        raise DataError(f"unknown mode {code!r}; expected BQ, PR or GEN_PR")


@dataclass(frozen=True)
class OperatorKpi:
    """Radio KPIs reported for one operator link. ``None`` marks a missing value."""

    rsrp: Optional[float]
    rsrq: Optional[float]
    snr: Optional[float]

    @property
    def complete(self) -> bool:
        return None not in (self.rsrp, self.rsrq, self.snr)

    def validate(self):
        for name, value, (lo, hi) in (
            ("rsrp", self.rsrp, RSRP_RANGE),
            ("rsrq", self.rsrq, RSRQ_RANGE),
            ("snr", self.snr, SNR_RANGE),
        ):
            if value is None:
                continue
            if not math.isfinite(value) or not lo <= value <= hi:
                raise DataError(f"{name} {value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class MeasurementRecord:
    timestamp: float
    lat: float
    lon: float
    chainage: float
    speed: float
    kpis: Tuple[OperatorKpi, OperatorKpi, OperatorKpi]
    delays: Dict[DelayKind, float]
    mode: Mode

    def validate(self):
        if len(self.kpis) != 3:
            raise DataError(f"expected 3 operator KPI sets, got {len(self.kpis)}")
        if not self.speed >= 0:
            raise DataError(f"negative speed {self.speed}")
        for kpi in self.kpis:
            kpi.validate()
        for kind, value in self.delays.items():
            if not (math.isfinite(value) and value > 0):
                raise DataError(f"{kind.key} delay must be positive, got {value}")
        if DelayKind.MOVEMENT_AUTHORITY in self.delays and not (
            DelayKind.MOVEMENT_AUTHORITY.is_sampled_at(self.timestamp)
        ):
            raise DataError(
                f"movement authority delay at timestamp {self.timestamp} "
                "(sampled every 10 s)"
            )

    @property
    def kpis_complete(self) -> bool:
        return all(k.complete for k in self.kpis)

    def feature_row(self) -> List[float]:
        row = []
        for kpi in self.kpis:
            row.extend((kpi.rsrp, kpi.rsrq, kpi.snr))
        row.append(self.speed)
        return row


@dataclass(frozen=True)
class Dataset:
    """Chronologically ordered, mode-homogeneous sequence of records.

    ``mode`` is ``None`` only for an empty dataset read from a header-only file.
    """

    records: Tuple[MeasurementRecord, ...] = ()
    mode: Optional[Mode] = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.records and self.mode is None:
            object.__setattr__(self, "mode", self.records[0].mode)
        prev = None
        for i, rec in enumerate(self.records):
            if rec.mode is not self.mode:
                raise DataError(
                    f"record {i} has mode {rec.mode.code}, dataset is {self.mode.code}"
                )
            if prev is not None and not rec.timestamp > prev:
                raise DataError(f"non-monotonic timestamp at record {i}")
            prev = rec.timestamp

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, item):
        return self.records[item]

    def subset(self, records: Iterable[MeasurementRecord]) -> "Dataset":
        return Dataset(tuple(records), self.mode)

    def delays(self, kind: DelayKind) -> np.ndarray:
        return np.array([r.delays[kind] for r in self.records if kind in r.delays])

    def kinds_present(self) -> List[DelayKind]:
        return [k for k in DelayKind if any(k in r.delays for r in self.records)]


FEATURE_COLUMNS = tuple(
    f"op{i}.{name}" for i in (1, 2, 3) for name in ("rsrp", "rsrq", "snr")
) + ("speed",)


@dataclass(frozen=True)
class FeatureMatrix:
    """Model input: a float array with named columns in the fixed order."""

    values: np.ndarray
    columns: Tuple[str, ...] = FEATURE_COLUMNS

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise DataError(
                f"feature matrix shape {values.shape} does not match "
                f"{len(self.columns)} columns"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("feature matrix contains missing or non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))

    def __len__(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

_KPI_COLUMNS = [
    f"op{i}_{name}" for i in (1, 2, 3) for name in ("rsrp", "rsrq", "snr")
]
CSV_HEADER = (
    ["timestamp_s", "lat", "lon", "chainage_km", "speed_kmh"]
    + _KPI_COLUMNS
    + ["mode"]
    + [k.column for k in DelayKind]
)


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    # repr is the shortest text that round-trips the float exactly
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _num(text: str, name: str, line: int, optional: bool = False) -> Optional[float]:
    text = text.strip()
    if not text:
        if optional:
            return None
        raise DataError(f"line {line}: missing value for {name}")
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: cannot parse {name}={text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}: non-finite {name}={text!r}")
    return value


def parse_csv(text) -> Dataset:
    """Parse a measurement CSV from a string or text stream.

    Empty delay or KPI fields become absent entries. Errors carry the
    1-based line number of the offending row.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: header row required") from None
    header = [h.strip() for h in header]
    if header != CSV_HEADER:
        raise DataError(
            "header does not match the measurement schema; expected "
            + ",".join(CSV_HEADER)
        )

    records = []
    mode = None
    prev_ts = None
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise DataError(
                f"line {line}: expected {len(CSV_HEADER)} fields, got {len(row)}"
            )
        ts = _num(row[0], "timestamp_s", line)
        if prev_ts is not None and not ts > prev_ts:
            raise DataError(f"non-monotonic timestamp at line {line}")
        prev_ts = ts
        kpi_vals = [_num(row[5 + j], _KPI_COLUMNS[j], line, optional=True) for j in range(9)]
        kpis = tuple(OperatorKpi(*kpi_vals[3 * i: 3 * i + 3]) for i in range(3))
        try:
            rec_mode = Mode.from_code(row[14].strip())
        except DataError as exc:
            raise DataError(f"line {line}: {exc}") from None
        if mode is None:
            mode = rec_mode
        elif rec_mode is not mode:
            raise DataError(
                f"line {line}: mode {rec_mode.code} differs from dataset mode {mode.code}"
            )
        delays = {}
        for j, kind in enumerate(DelayKind):
            value = _num(row[15 + j], kind.column, line, optional=True)
            if value is not None:
                delays[kind] = value
        rec = MeasurementRecord(
            timestamp=ts,
            lat=_num(row[1], "lat", line),
            lon=_num(row[2], "lon", line),
            chainage=_num(row[3], "chainage_km", line),
            speed=_num(row[4], "speed_kmh", line),
            kpis=kpis,
            delays=delays,
            mode=rec_mode,
        )
        try:
            rec.validate()
        except DataError as exc:
            raise DataError(f"line {line}: {exc}") from None
        records.append(rec)
    return Dataset(tuple(records), mode)


def write_csv(dataset: Dataset, stream=None) -> str:
    """Serialise ``dataset``; returns the text (also written to ``stream`` if given)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in dataset.records:
        row = [_fmt(rec.timestamp), _fmt(rec.lat), _fmt(rec.lon),
               _fmt(rec.chainage), _fmt(rec.speed)]
        for kpi in rec.kpis:
            row.extend((_fmt(kpi.rsrp), _fmt(kpi.rsrq), _fmt(kpi.snr)))
        row.append(rec.mode.code)
        row.extend(_fmt(rec.delays.get(kind)) for kind in DelayKind)
        writer.writerow(row)
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_dataset(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh)


def save_dataset(dataset: Dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_csv(dataset, fh)


# ---------------------------------------------------------------------------
# Features and splits
# ---------------------------------------------------------------------------

def to_features(dataset: Dataset, kind: DelayKind):
    """Assemble ``(FeatureMatrix, targets, row_index)`` for one delay kind.

    Only records carrying a ``kind`` delay and a complete set of KPIs are
    used; ``row_index`` maps every feature row back to its record position.
    """
    if len(dataset) == 0:
        raise DataError("cannot assemble features from an empty dataset")
    rows, targets, index = [], [], []
    for i, rec in enumerate(dataset.records):
        if kind in rec.delays and rec.kpis_complete:
            rows.append(rec.feature_row())
            targets.append(rec.delays[kind])
            index.append(i)
    if not rows:
        raise DataError(f"no records carry a {kind.key} delay with complete KPIs")
    return (
        FeatureMatrix(np.array(rows, dtype=float)),
        np.array(targets, dtype=float),
        np.array(index, dtype=np.intp),
    )


def time_split(dataset: Dataset, train_fraction: float = DEFAULT_TRAIN_FRACTION):
    """Chronological split: the first ceil(n * fraction) records train, the rest test."""
    if not 0 < train_fraction < 1:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(dataset)
    if n < 2:
        raise DataError("time_split needs at least 2 records")
    # rounding guards against 10 * 0.7 == 7.000000000000001
    cut = math.ceil(round(n * train_fraction, 9))
    cut = min(max(cut, 1), n - 1)
    return dataset.subset(dataset.records[:cut]), dataset.subset(dataset.records[cut:])


def region_split(dataset: Dataset, boundary_lon: float = DEFAULT_BOUNDARY_LON):
    """Split into ``(east, west)`` at a longitude; east is ``lon >= boundary``."""
    if not -180 <= boundary_lon <= 180:
        raise DataError(f"boundary longitude {boundary_lon} outside [-180, 180]")
    east = [r for r in dataset.records if r.lon >= boundary_lon]
    west = [r for r in dataset.records if r.lon < boundary_lon]
    return dataset.subset(east), dataset.subset(west)


def check_columns(expected: Sequence[str], actual: Sequence[str]):
    if tuple(expected) != tuple(actual):
        raise DataError(
            f"feature columns {list(actual)} do not match training columns {list(expected)}"
        )
