"""Versioned binary model files.

Layout (all integers little-endian)::

    magic      4 bytes   b"RDLM"
    version    u16
    kind       u8        0 = forest, 1 = boosted
    preset     u16 length + UTF-8 preset name (empty if none)
    metadata   u32 length + UTF-8 JSON: columns, hyperparameters, training info
    init       f64       boosted initial prediction (0 for forests)
    lr         f64       boosted learning rate (1 for forests)
    n_trees    u32
    per tree:  u32 node count n, then
               feature  n x i64
               threshold n x f64
               left     n x i64
               right    n x i64
               value    n x f64

Floats are stored as raw IEEE-754 doubles, so a loaded model reproduces
predictions bit for bit.
"""

import io
import json
import struct

import numpy as np

from .boosting import GradientBoostingRegressor
from .forest import RandomForestRegressor
from .models import ModelPreset, TrainedModel
from .tree import RegressionTree

MAGIC = b"RDLM"
FORMAT_VERSION = 1

_FOREST, _BOOSTED = 0, 1


class ModelFormatError(ValueError):
    """The byte stream is not a readable model file of this version."""


def _pack_str(fmt, text):
    raw = text.encode("utf-8")
    return struct.pack(fmt, len(raw)) + raw


def save_model(model: TrainedModel) -> bytes:
    est = model.estimator
    boosted = isinstance(est, GradientBoostingRegressor)
    meta = {
        "columns": list(model.columns),
        "params": est.get_params(),
        "metadata": model.metadata,
    }
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<HB", FORMAT_VERSION, _BOOSTED if boosted else _FOREST))
    out.write(_pack_str("<H", model.preset.value if model.preset else ""))
    out.write(_pack_str("<I", json.dumps(meta, sort_keys=True)))
    out.write(struct.pack("<dd", est.init_ if boosted else 0.0,
                          est.learning_rate if boosted else 1.0))
    out.write(struct.pack("<I", len(est.estimators_)))
    for tree in est.estimators_:
        out.write(struct.pack("<I", tree.node_count))
        out.write(np.asarray(tree.feature, dtype="<i8").tobytes())
        out.write(np.asarray(tree.threshold, dtype="<f8").tobytes())
        out.write(np.asarray(tree.left, dtype="<i8").tobytes())
        out.write(np.asarray(tree.right, dtype="<i8").tobytes())
        out.write(np.asarray(tree.value, dtype="<f8").tobytes())
    return out.getvalue()


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ModelFormatError("truncated model stream")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, n):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * n), dtype=dt).astype(dt.newbyteorder("="))


def load_model(data: bytes) -> TrainedModel:
    r = _Reader(data)
    if bytes(r.take(4)) != MAGIC:
        raise ModelFormatError("not a model file (bad magic bytes)")
    version, kind = r.unpack("<HB")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version} (expected {FORMAT_VERSION})"
        )
    if kind not in (_FOREST, _BOOSTED):
        raise ModelFormatError(f"unknown model kind tag {kind}")
    (plen,) = r.unpack("<H")
    preset_name = bytes(r.take(plen)).decode("utf-8")
    (mlen,) = r.unpack("<I")
    try:
        meta = json.loads(bytes(r.take(mlen)).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt metadata block: {exc}") from None
    init, lr = r.unpack("<dd")
    (n_trees,) = r.unpack("<I")
    trees = []
    for _ in range(n_trees):
        (n,) = r.unpack("<I")
        trees.append(RegressionTree(
            feature=r.array("<i8", n),
            threshold=r.array("<f8", n),
            left=r.array("<i8", n),
            right=r.array("<i8", n),
            value=r.array("<f8", n),
        ))
    if r.pos != len(r.data):
        raise ModelFormatError("trailing bytes after model payload")

    columns = tuple(meta["columns"])
    if kind == _BOOSTED:
        est = GradientBoostingRegressor(**meta["params"])
        est.init_ = init
        est.learning_rate = lr
    else:
        est = RandomForestRegressor(**meta["params"])
    est.estimators_ = trees
    est.n_features_in_ = len(columns)
    preset = ModelPreset.from_name(preset_name) if preset_name else None
    return TrainedModel(est, preset, columns, meta.get("metadata", {}))


def save_model_file(model: TrainedModel, path):
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def load_model_file(path) -> TrainedModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())
