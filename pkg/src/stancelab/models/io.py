"""Versioned on-disk format for trained models.

Layout: an ascii magic line naming the format version and model kind, one
line of JSON metadata, then the raw little-endian float64 bytes of each
array in manifest order. Everything about the encoding is pinned (key order,
separators, dtype, C order) so that saving the same model twice produces
byte-identical files.

PMI tables carry no arrays; their scores ride in the metadata with the
minus-infinity sentinel encoded as null (JSON has no infinities).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..labels import CLASS_INDEX, CLASS_ORDER, Stance
from .cnn import CnnModel
from .logreg import LogRegModel
from .pmi import NEG_INF, PmiTable

MAGIC = "stancelab-model"
VERSION = 1

_ARRAY_FIELDS = {
    "logreg": ["weights", "biases"],
    "cnn": ["filters", "filter_biases", "output_weights", "output_biases"],
}


def _kind_of(model) -> str:
    if isinstance(model, LogRegModel):
        return "logreg"
    if isinstance(model, CnnModel):
        return "cnn"
    if isinstance(model, PmiTable):
        return "pmi"
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _pmi_extra(table: PmiTable) -> dict:
    rows = sorted(
        ((hs, CLASS_INDEX[stance], score) for (hs, stance), score in table.scores.items()),
        key=lambda r: (r[0], r[1]),
    )
    return {
        "classes": [s.value for s in CLASS_ORDER],
        "scores": [[hs, ci, None if score == NEG_INF else score]
                   for hs, ci, score in rows],
    }


def save_model(model, path: str | Path) -> None:
    kind = _kind_of(model)
    arrays = []
    blobs = []
    for name in _ARRAY_FIELDS.get(kind, []):
        arr = np.ascontiguousarray(getattr(model, name), dtype="<f8")
        arrays.append([name, list(arr.shape)])
        blobs.append(arr.tobytes())
    extra = _pmi_extra(model) if kind == "pmi" else {}
    manifest = json.dumps({"arrays": arrays, "extra": extra},
                          sort_keys=True, separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(f"{MAGIC} v{VERSION} {kind}\n".encode("ascii"))
        fh.write(manifest.encode("utf-8") + b"\n")
        for blob in blobs:
            fh.write(blob)


def load_model(path: str | Path):
    """Read a model back; the return type depends on the stored kind."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").rstrip("\n")
        parts = header.split(" ")
        if len(parts) != 3 or parts[0] != MAGIC:
            raise ValueError(f"not a model file: bad header {header!r}")
        if parts[1] != f"v{VERSION}":
            raise ValueError(f"unsupported model format version {parts[1]}")
        kind = parts[2]
        if kind not in ("logreg", "cnn", "pmi"):
            raise ValueError(f"unknown model kind {kind!r}")
        manifest = json.loads(fh.readline().decode("utf-8"))
        fields = {}
        for name, shape in manifest["arrays"]:
            count = int(math.prod(shape))
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"truncated array {name!r} in {path}")
            fields[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        trailing = fh.read(1)
    if trailing:
        raise ValueError(f"trailing bytes after arrays in {path}")

    if kind == "logreg":
        return LogRegModel(**fields)
    if kind == "cnn":
        return CnnModel(**fields)
    scores: dict[tuple[str, Stance], float] = {}
    for hs, class_index, score in manifest["extra"]["scores"]:
        scores[hs, CLASS_ORDER[class_index]] = NEG_INF if score is None else float(score)
    return PmiTable(scores=scores)
