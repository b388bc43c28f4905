"""Versioned JSON serialization of trained models.

A saved model is one JSON object::

    {"format": "onlineage-model", "version": 1,
     "family": "forest_clf", "kind": "forest", "seed": 123,
     "feature_names": ["mendeley", ...], "params": {...},
     "scaler": null | {"mean": [...], "scale": [...]},
     "state": {...}}

``state`` holds the variant's fitted parameters. Arrays are stored as
``{"__ndarray__": dtype, "shape": [...], "data": base64(zlib(raw bytes))}`` so
a load reproduces predictions bit for bit and large forests stay compact.
Loading refuses a file whose feature order differs from the expected one.
"""

from __future__ import annotations

import base64
import json
import zlib
from pathlib import Path

import numpy as np

from onlineage.models.forest import RandomForest
from onlineage.models.linear import LinearModel
from onlineage.models.logistic import LogisticModel
from onlineage.models.mlp import MLPRegressor
from onlineage.models.naive_bayes import GaussianNB
from onlineage.models.preprocessing import ScalerParams
from onlineage.models.selection import TrainedModel
from onlineage.models.tree import DecisionTree
from onlineage.platforms import PLATFORMS

FORMAT = "onlineage-model"
VERSION = 1

KINDS = {
    "linear": LinearModel,
    "tree": DecisionTree,
    "forest": RandomForest,
    "mlp": MLPRegressor,
    "logistic": LogisticModel,
    "gnb": GaussianNB,
}


class ModelFormatError(ValueError):
    pass


def encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    if a.dtype.kind == "i":
        a = a.astype("<i8")
    elif a.dtype.kind == "f":
        a = a.astype("<f8")
    else:
        raise TypeError(f"cannot serialize array of dtype {a.dtype}")
    blob = base64.b64encode(zlib.compress(a.tobytes(), 6)).decode("ascii")
    return {"__ndarray__": a.dtype.str, "shape": list(a.shape), "data": blob}


def decode_array(obj: dict) -> np.ndarray:
    raw = zlib.decompress(base64.b64decode(obj["data"]))
    return np.frombuffer(raw, dtype=np.dtype(obj["__ndarray__"])).reshape(obj["shape"]).copy()


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return decode_array(obj)
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return encode_array(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def to_dict(trained: TrainedModel) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "family": trained.family,
        "kind": trained.model.kind,
        "seed": trained.seed,
        "feature_names": list(trained.feature_names),
        "params": _plain(trained.params),
        "scaler": _plain(trained.scaler.state()) if trained.scaler is not None else None,
        "state": _plain(trained.model.state()),
    }


def dumps(trained: TrainedModel) -> str:
    return json.dumps(to_dict(trained), separators=(",", ":"))


def save_model(trained: TrainedModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(trained), encoding="utf-8")


def from_dict(data: dict, feature_names=PLATFORMS) -> TrainedModel:
    if data.get("format") != FORMAT:
        raise ModelFormatError("not a serialized model")
    if data.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {data.get('version')!r}")
    if feature_names is not None and tuple(data["feature_names"]) != tuple(feature_names):
        raise ModelFormatError("feature-name order does not match")
    try:
        cls = KINDS[data["kind"]]
    except KeyError:
        raise ModelFormatError(f"unknown model kind {data.get('kind')!r}") from None
    model = cls.from_state(_decode(data["state"]))
    scaler = None
    if data["scaler"] is not None:
        scaler = ScalerParams(*(_decode(data["scaler"])[k] for k in ("mean", "scale")))
    return TrainedModel(data["family"], model, data["params"], data["seed"], scaler,
                        data["feature_names"])


def loads(text: str, feature_names=PLATFORMS) -> TrainedModel:
    return from_dict(json.loads(text), feature_names)


def load_model(path, feature_names=PLATFORMS) -> TrainedModel:
    return loads(Path(path).read_text(encoding="utf-8"), feature_names)
