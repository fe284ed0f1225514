"""Versioned JSON model files (``*.bopnn.json``) with a CRC-32 guard.

The document is serialised canonically (sorted keys, no whitespace, floats
in shortest round-trip form). ``crc32`` holds the checksum of that canonical
text with the ``crc32`` key itself removed.
"""

import json
import zlib
from pathlib import Path

import numpy as np

from .classifier import BOPNNClassifier
from .ensemble import BaseModel, HyperParams, project_rows
from .exceptions import CorruptFile, VersionMismatch
from .subspace import DiscriminantBasis

FORMAT = "bopnn-model"
FORMAT_VERSION = 1
SUFFIX = ".bopnn.json"


def _canonical(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _checksum(doc):
    return format(zlib.crc32(_canonical(doc).encode("utf-8")) & 0xFFFFFFFF, "08x")


def _model_entry(m):
    disc = m.discriminant
    return {
        "subset": m.subset.tolist(),
        "inbag": m.inbag.tolist(),
        "inbag_labels": m.inbag_labels.tolist(),
        "basis": None if disc is None else disc.basis.tolist(),
        "values": None if disc is None else disc.values.tolist(),
    }


def to_document(estimator, **metadata):
    hp = estimator.hyperparams_
    doc = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "hyperparams": hp.to_dict(),
        "classes": estimator.classes_.tolist(),
        "n_features": int(estimator.n_features_in_),
        "train_X": estimator._fit_X.tolist(),
        "train_y": estimator._fit_y.tolist(),
        "oob_accuracy": estimator.oob_score_,
        "models": [_model_entry(m) for m in estimator.estimators_],
        "metadata": metadata,
    }
    doc["crc32"] = _checksum(doc)
    return doc


def dumps(estimator, **metadata):
    return _canonical(to_document(estimator, **metadata)) + "\n"


def save_model(estimator, path, **metadata):
    """Write a fitted estimator; ``metadata`` must be JSON-serialisable."""
    Path(path).write_text(dumps(estimator, **metadata), encoding="utf-8")


def from_document(doc):
    if doc.get("format") != FORMAT:
        raise CorruptFile("not a bopnn model file")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version}, expected {FORMAT_VERSION}")
    stored = doc.pop("crc32", None)
    if stored != _checksum(doc):
        raise CorruptFile("checksum mismatch")
    doc["crc32"] = stored

    hp = HyperParams.from_dict(doc["hyperparams"])
    est = BOPNNClassifier(
        n_neighbors=hp.k, subset_size=hp.q0, n_components=hp.q, n_estimators=hp.B,
        bag_fraction=hp.pi_b, projection=hp.projection, balanced=hp.balanced,
        random_state=hp.seed,
    )
    X = np.array(doc["train_X"], dtype=np.float64).reshape(-1, doc["n_features"])
    est.classes_ = np.array(doc["classes"])
    est.n_features_in_ = doc["n_features"]
    est.hyperparams_ = hp
    est._fit_X = np.ascontiguousarray(X)
    est._fit_y = np.array(doc["train_y"], dtype=np.int64)
    est.oob_score_ = doc["oob_accuracy"]
    models = []
    for entry in doc["models"]:
        subset = np.array(entry["subset"], dtype=np.int64)
        inbag = np.array(entry["inbag"], dtype=np.int64)
        disc = None
        if entry["basis"] is not None:
            basis = np.array(entry["basis"], dtype=np.float64).reshape(subset.size, -1)
            disc = DiscriminantBasis(subset, basis, np.array(entry["values"], dtype=np.float64))
        projected = project_rows(X[inbag], subset, None if disc is None else disc.basis)
        models.append(BaseModel(subset, inbag, np.array(entry["inbag_labels"], dtype=np.int64),
                                projected, disc))
    est.estimators_ = models
    est.metadata_ = doc.get("metadata", {})
    return est


def load_model(path):
    """Read a model file written by :func:`save_model`.

    The returned estimator carries the saved metadata in ``metadata_``.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"unreadable model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptFile("model file is not a JSON object")
    return from_document(doc)
