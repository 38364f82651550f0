"""Train, evaluate, select and generate: the batch steps behind the CLI."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .data import (DataError, Dataset, DelayKind, FeatureMatrix, MeasurementRecord,
                   Mode, time_split, to_features)
from .ensemble import (ModelPreset, TrainedModel, fit_preset, load_model_file,
                       predict, save_model_file)
from .metrics import MetricsReport, evaluate, rmse

log = logging.getLogger(__name__)

MODEL_SUFFIX = ".rdm"
METRIC_NAMES = ("RMSE", "R2", "MAE", "Precision", "Recall")
UNDEFINED = "undefined"
# generated delays are floored here to keep every present delay positive
MIN_GENERATED_DELAY_MS = 0.01


def model_filename(kind: DelayKind, preset: ModelPreset) -> str:
    return f"{kind.key}__{preset.value}{MODEL_SUFFIX}"


def parse_model_filename(path) -> Tuple[DelayKind, ModelPreset]:
    stem = Path(path).name[: -len(MODEL_SUFFIX)]
    kind_key, _, preset_name = stem.partition("__")
    return DelayKind.from_key(kind_key), ModelPreset.from_name(preset_name)


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainingRow:
    kind: DelayKind
    preset: ModelPreset
    rows: int
    train_rmse: float
    seconds: float
    path: Optional[str] = None


def training_subset(dataset: Dataset, train_fraction: float) -> Dataset:
    if train_fraction >= 1.0:
        return dataset
    return time_split(dataset, train_fraction)[0]


def train_models(dataset: Dataset, kinds: Iterable[DelayKind],
                 presets: Iterable[ModelPreset], seed: int = 0,
                 train_fraction: float = 0.7):
    """Fit every (kind, preset) pair on the chronological training share of PR data.

    Returns ``{(kind, preset): TrainedModel}`` and a list of TrainingRow.
    """
    if dataset.mode is not Mode.PACKET_REPLICATION:
        found = dataset.mode.code if dataset.mode else "empty"
        raise DataError(f"training is constrained to PR-mode data (got {found})")
    subset = training_subset(dataset, train_fraction)
    models, report = {}, []
    presets = list(presets)
    for kind in kinds:
        X, y, _ = to_features(subset, kind)
        if len(y) < 2:
            raise DataError(f"insufficient rows to train {kind.key}: {len(y)}")
        for preset in presets:
            start = time.perf_counter()
            model = fit_preset(preset, X, y, seed, delay_kind=kind.key,
                               train_fraction=train_fraction)
            elapsed = time.perf_counter() - start
            models[(kind, preset)] = model
            report.append(TrainingRow(kind, preset, len(y), rmse(y, predict(model, X)), elapsed))
            log.info("trained %s/%s on %d rows in %.1f s", kind.key, preset.value, len(y), elapsed)
    return models, report


def save_models(models: Mapping, out_dir) -> Dict[Tuple[DelayKind, ModelPreset], Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for (kind, preset), model in models.items():
        path = out / model_filename(kind, preset)
        save_model_file(model, path)
        paths[(kind, preset)] = path
    return paths


def model_kind(model: TrainedModel, path=None) -> DelayKind:
    key = model.metadata.get("delay_kind")
    if key:
        return DelayKind.from_key(key)
    if path is not None:
        return parse_model_filename(path)[0]
    raise DataError("model carries no delay kind")


def discover_models(paths: Sequence) -> Dict[Tuple[DelayKind, ModelPreset], Tuple[Path, TrainedModel]]:
    """Load model files, expanding directories to the model files they contain."""
    files: List[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files.extend(sorted(p.glob(f"*{MODEL_SUFFIX}")))
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"model path not found: {p}")
    found = {}
    for f in files:
        model = load_model_file(f)
        kind = model_kind(model, f)
        preset = model.preset or parse_model_filename(f)[1]
        if (kind, preset) in found:
            raise DataError(f"duplicate model for {kind.key}/{preset.value}: {f}")
        found[(kind, preset)] = (f, model)
    if not found:
        raise DataError("no model files found")
    return found


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

MetricsTable = Dict[DelayKind, Dict[ModelPreset, MetricsReport]]


def evaluate_models(models: Mapping[Tuple[DelayKind, ModelPreset], TrainedModel],
                    dataset: Dataset, split: str = "holdout",
                    train_fraction: float = 0.7) -> MetricsTable:
    """Score every model against its kind's delays in ``dataset``.

    ``split="holdout"`` keeps only the chronological test share; ``"full"``
    uses every record.
    """
    if split == "holdout":
        dataset = time_split(dataset, train_fraction)[1]
    elif split != "full":
        raise ValueError(f"split must be 'holdout' or 'full', got {split!r}")
    table: MetricsTable = {}
    for kind in DelayKind:
        pairs = [(p, m) for (k, p), m in models.items() if k is kind]
        if not pairs:
            continue
        X, y, _ = to_features(dataset, kind)
        table[kind] = {}
        for preset, model in sorted(pairs, key=lambda pm: list(ModelPreset).index(pm[0])):
            table[kind][preset] = evaluate(y, predict(model, X), kind.critical_threshold)
    return table


def _cell(value: Optional[float]) -> str:
    return UNDEFINED if value is None else repr(float(value))


def write_metrics_table(table: MetricsTable, split: str) -> str:
    """Render metrics in the per-delay / per-metric / per-preset layout."""
    presets = [p for p in ModelPreset if any(p in row for row in table.values())]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Delay", "Metric", "Threshold_ms", "Split"] + [p.value for p in presets])
    for kind, row in table.items():
        for name in METRIC_NAMES:
            cells = [_cell(row[p].as_dict()[name]) if p in row else "" for p in presets]
            w.writerow([kind.key, name, repr(kind.critical_threshold), split] + cells)
    return buf.getvalue()


def read_metrics_table(text: str) -> Dict[DelayKind, Dict[ModelPreset, Dict[str, Optional[float]]]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[:2] != ["Delay", "Metric"]:
        raise DataError("metrics table must start with Delay,Metric columns")
    preset_cols = [(i, ModelPreset.from_name(h)) for i, h in enumerate(header)
                   if h not in ("Delay", "Metric", "Threshold_ms", "Split")]
    if not preset_cols:
        raise DataError("metrics table has no model columns")
    out: Dict = {}
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        kind = DelayKind.from_key(row[0])
        metric = row[1]
        for i, preset in preset_cols:
            text_val = row[i].strip() if i < len(row) else ""
            if not text_val:
                raise DataError(f"line {line}: missing {metric} for {kind.key}/{preset.value}")
            value = None if text_val == UNDEFINED else float(text_val)
            out.setdefault(kind, {}).setdefault(preset, {})[metric] = value
    return out


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Selection:
    kind: DelayKind
    chosen: ModelPreset
    rmse: Dict[ModelPreset, float]


def select_best(table) -> Dict[DelayKind, Selection]:
    """Pick the minimum-RMSE preset per delay kind; ties go to the earlier preset.

    ``table`` maps kind -> preset -> either a MetricsReport or a dict with an
    "RMSE" entry. Every kind must have an RMSE for every preset it lists.
    """
    selection = {}
    for kind, row in table.items():
        scores = {}
        for preset in ModelPreset:
            if preset not in row:
                continue
            cell = row[preset]
            value = cell.rmse if isinstance(cell, MetricsReport) else cell.get("RMSE")
            if value is None or not math.isfinite(value):
                raise DataError(f"missing RMSE for {kind.key}/{preset.value}")
            scores[preset] = value
        if not scores:
            raise DataError(f"no RMSE values for {kind.key}")
        chosen = min(scores, key=lambda p: (scores[p], list(ModelPreset).index(p)))
        selection[kind] = Selection(kind, chosen, scores)
    return selection


def write_selection(selection: Mapping[DelayKind, Selection]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Delay", "Selected"] + [f"{p.value}_RMSE" for p in ModelPreset])
    for kind, sel in selection.items():
        w.writerow([kind.key, sel.chosen.value]
                   + [repr(sel.rmse[p]) if p in sel.rmse else "" for p in ModelPreset])
    return buf.getvalue()


def read_selection(text: str) -> Dict[DelayKind, ModelPreset]:
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or reader.fieldnames[:2] != ["Delay", "Selected"]:
        raise DataError("selection table must start with Delay,Selected columns")
    return {DelayKind.from_key(r["Delay"]): ModelPreset.from_name(r["Selected"]) for r in reader}


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def generate_pr(models: Mapping[DelayKind, TrainedModel], bq: Dataset) -> Dataset:
    """Replace BQ delays with model predictions, keeping everything else.

    Kinds without a model are left out with a warning; movement-authority
    values are only produced at their 10 s sampling instants.
    """
    for kind in DelayKind:
        if kind not in models:
            log.warning("no model for %s: omitted from the generated dataset", kind.key)
    complete = [i for i, r in enumerate(bq.records) if r.kpis_complete]
    predictions: Dict[DelayKind, np.ndarray] = {}
    if complete:
        X = FeatureMatrix(np.array([bq.records[i].feature_row() for i in complete]))
        for kind, model in models.items():
            predictions[kind] = np.maximum(predict(model, X), MIN_GENERATED_DELAY_MS)
    position = {rec_i: row for row, rec_i in enumerate(complete)}
    out = []
    for i, rec in enumerate(bq.records):
        delays = {}
        row = position.get(i)
        if row is not None:
            for kind in DelayKind:
                if kind in predictions and kind.is_sampled_at(rec.timestamp):
                    delays[kind] = float(predictions[kind][row])
        out.append(MeasurementRecord(
            timestamp=rec.timestamp, lat=rec.lat, lon=rec.lon, chainage=rec.chainage,
            speed=rec.speed, kpis=rec.kpis, delays=delays, mode=Mode.GENERATED_PR))
    return Dataset(tuple(out), Mode.GENERATED_PR)


def selected_models(found, selection: Optional[Mapping[DelayKind, ModelPreset]] = None):
    """Resolve one model per kind from discovered files and an optional selection."""
    chosen = {}
    kinds = {k for k, _ in found}
    for kind in DelayKind:
        if kind not in kinds:
            continue
        if selection is not None:
            if kind not in selection:
                continue
            key = (kind, selection[kind])
            if key not in found:
                log.warning("selected model %s/%s not provided: %s omitted",
                            kind.key, selection[kind].value, kind.key)
                continue
            chosen[kind] = found[key][1]
        else:
            options = [p for k, p in found if k is kind]
            if len(options) > 1:
                raise DataError(
                    f"several models for {kind.key} ({', '.join(p.value for p in options)}); "
                    "pass a selection table"
                )
            chosen[kind] = found[(kind, options[0])][1]
    return chosen
