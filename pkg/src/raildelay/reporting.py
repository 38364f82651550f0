"""Reliability, regional and summary tables plus GeoJSON export."""

from __future__ import annotations

import csv
import io
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .data import DataError, Dataset, DelayKind, region_split, DEFAULT_BOUNDARY_LON
from .metrics import SummaryStats, critical_count, format_percentage, summary

RELIABILITY_HEADER = ["Delay", "Measurement Mode", "Count", "Percentage"]
STATS_HEADER = list(SummaryStats.COLUMNS)


def dataset_labels(datasets: Sequence[Tuple[str, Dataset]]) -> List[str]:
    """Mode labels, disambiguated by name when two datasets share a mode."""
    labels = [d.mode.label if d.mode else name for name, d in datasets]
    out = []
    for (name, _), label in zip(datasets, labels):
        out.append(f"{label} ({name})" if labels.count(label) > 1 else label)
    return out


def _kinds(datasets, kinds):
    present = [k for k in DelayKind if any(k in ds.kinds_present() for _, ds in datasets)]
    return [k for k in present if kinds is None or k in kinds]


def _check(datasets):
    if not datasets:
        raise DataError("report needs at least one dataset")
    for name, ds in datasets:
        if len(ds) == 0:
            raise DataError(f"dataset {name} is empty")


def reliability_rows(datasets, kinds=None):
    """Critical-event counts per delay kind and dataset (strictly above threshold)."""
    _check(datasets)
    labels = dataset_labels(datasets)
    rows = []
    for kind in _kinds(datasets, kinds):
        for label, (_, ds) in zip(labels, datasets):
            values = ds.delays(kind)
            if values.size == 0:
                continue
            count, pct = critical_count(values, kind.critical_threshold)
            rows.append([kind.label, label, count, format_percentage(pct)])
    return RELIABILITY_HEADER, rows


def _fmt_stat(x):
    return f"{x:.2f}"


def summary_rows(datasets, kinds=None):
    _check(datasets)
    labels = dataset_labels(datasets)
    rows = []
    for kind in _kinds(datasets, kinds):
        for label, (_, ds) in zip(labels, datasets):
            values = ds.delays(kind)
            if values.size:
                rows.append([kind.label, label] + [_fmt_stat(v) for v in summary(values).row()])
    return ["Delay", "Measurement Mode"] + STATS_HEADER, rows


def regional_rows(datasets, kinds=None, boundary_lon: float = DEFAULT_BOUNDARY_LON):
    _check(datasets)
    labels = dataset_labels(datasets)
    multi = len(datasets) > 1
    rows = []
    for kind in _kinds(datasets, kinds):
        for label, (_, ds) in zip(labels, datasets):
            east, west = region_split(ds, boundary_lon)
            for region, part in (("East", east), ("West", west)):
                values = part.delays(kind)
                if values.size == 0:
                    continue
                lead = [f"{kind.label} (ms)"] + ([label] if multi else []) + [region]
                rows.append(lead + [_fmt_stat(v) for v in summary(values).row()])
    header = ["Test Name"] + (["Measurement Mode"] if multi else []) + ["Region"] + STATS_HEADER
    return header, rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def to_text(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def export_geojson(dataset: Dataset, kind: DelayKind) -> dict:
    """Point features for every record carrying ``kind``.

    ``critical`` flags delays strictly above the kind's threshold; ``bucket``
    is the quintile (0-4) of a sub-threshold delay among all sub-threshold
    delays, for light-to-dark styling, and null for critical points.
    """
    records = [r for r in dataset.records if kind in r.delays]
    if not records:
        raise DataError(f"dataset has no {kind.key} delays to export")
    values = np.array([r.delays[kind] for r in records])
    threshold = kind.critical_threshold
    normal = values[values <= threshold]
    edges = np.quantile(normal, [0.2, 0.4, 0.6, 0.8]) if normal.size else np.array([])
    mode = dataset.mode.code if dataset.mode else None
    features = []
    for rec, v in zip(records, values):
        critical = bool(v > threshold)
        bucket: Optional[int] = None
        if not critical:
            bucket = int(np.searchsorted(edges, v, side="left"))
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [rec.lon, rec.lat]},
            "properties": {
                "timestamp_s": rec.timestamp,
                "chainage_km": rec.chainage,
                "delay_ms": float(v),
                "delay_kind": kind.key,
                "mode": mode,
                "critical": critical,
                "bucket": bucket,
            },
        })
    return {"type": "FeatureCollection", "features": features}
