"""Tabular ingestion, one-hot encoding, and the repeated train/test split protocol."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import SplitMix64
from .exceptions import MissingValue, ParseError, SchemaMismatch, TooSmall, UnknownTarget

MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "?"})


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str  # "numeric" or "categorical"
    categories: tuple = ()

    @property
    def width(self):
        return 1 if self.kind == "numeric" else len(self.categories)

    def feature_names(self):
        if self.kind == "numeric":
            return [self.name]
        return [f"{self.name}={c}" for c in self.categories]

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "categories": list(self.categories)}

    @classmethod
    def from_dict(cls, data):
        return cls(data["name"], data["kind"], tuple(data.get("categories", ())))


@dataclass
class LabeledDataset:
    """Encoded features with class labels ``1..K`` (index into ``class_names`` plus one)."""

    X: np.ndarray
    y: np.ndarray
    schema: list
    class_names: list
    target: str = None
    feature_names: list = field(default=None)

    def __post_init__(self):
        if self.feature_names is None:
            self.feature_names = [f for col in self.schema for f in col.feature_names()]

    @property
    def n_classes(self):
        return len(self.class_names)

    def subset(self, idx):
        return LabeledDataset(self.X[idx], self.y[idx], self.schema, self.class_names,
                              self.target, self.feature_names)


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.7
    repetitions: int = 50
    train_cap: int = 7000
    test_cap: int = 3000

    @classmethod
    def for_size(cls, n):
        return cls(repetitions=repetitions_for(n))


def _delimiter(path):
    return "\t" if Path(path).suffix.lower() in (".tsv", ".tab") else ","


def read_rows(path):
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=_delimiter(path), strict=True))
    except csv.Error as exc:
        raise ParseError(f"malformed {path.name}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path.name} is not valid UTF-8") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError(f"{path.name} is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(r)}", row=i)
    return header, body


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _check_missing(header, body):
    for i, r in enumerate(body, start=2):
        for name, cell in zip(header, r):
            if cell.strip().lower() in MISSING_TOKENS:
                raise MissingValue("missing value", row=i, column=name)


def _resolve_target(header, target):
    if target is None:
        return len(header) - 1
    if target in header:
        return header.index(target)
    raise UnknownTarget(f"target column {target!r} not in header {header}")


def infer_schema(header, body, declared_categoricals=()):
    declared = set(declared_categoricals or ())
    unknown = declared - set(header)
    if unknown:
        raise ParseError(f"declared categorical columns not found: {sorted(unknown)}")
    schema = []
    for j, name in enumerate(header):
        cells = [r[j].strip() for r in body]
        if name not in declared and all(_is_number(c) for c in cells):
            schema.append(ColumnSchema(name, "numeric"))
        else:
            schema.append(ColumnSchema(name, "categorical", tuple(dict.fromkeys(cells))))
    return schema


def encode_rows(rows, schema, columns):
    """One-hot encode ``rows`` (lists of strings indexed like ``columns``) under ``schema``."""
    position = {name: j for j, name in enumerate(columns)}
    missing = [c.name for c in schema if c.name not in position]
    if missing:
        raise SchemaMismatch(f"input lacks columns {missing}")
    width = sum(c.width for c in schema)
    X = np.zeros((len(rows), width))
    offset = 0
    for col in schema:
        j = position[col.name]
        if col.kind == "numeric":
            for i, r in enumerate(rows):
                try:
                    X[i, offset] = float(r[j])
                except ValueError as exc:
                    raise ParseError(f"non-numeric value {r[j]!r}", row=i + 2, column=col.name) from exc
        else:
            lookup = {c: p for p, c in enumerate(col.categories)}
            for i, r in enumerate(rows):
                cell = r[j].strip()
                if cell not in lookup:
                    raise SchemaMismatch(f"unknown category {cell!r} in column {col.name!r} (row {i + 2})")
                X[i, offset + lookup[cell]] = 1.0
        offset += col.width
    return X


def load_table(path, target=None, declared_categoricals=None):
    """Read a CSV/TSV file into a :class:`LabeledDataset`.

    Numeric columns pass through; every other column (or any named in
    ``declared_categoricals``) becomes one indicator column per category, in
    first-appearance order. The target (default: last column) is coded
    ``1..K`` in first-appearance order. Missing cells are rejected.
    """
    header, body = read_rows(path)
    if len(body) < 2:
        raise ParseError(f"{Path(path).name} needs at least two data rows")
    _check_missing(header, body)
    t = _resolve_target(header, target)
    features = [h for j, h in enumerate(header) if j != t]
    feature_rows = [[c for j, c in enumerate(r) if j != t] for r in body]
    schema = infer_schema(features, feature_rows, declared_categoricals)
    X = encode_rows(feature_rows, schema, features)
    labels = [r[t].strip() for r in body]
    class_names = list(dict.fromkeys(labels))
    code = {c: i + 1 for i, c in enumerate(class_names)}
    y = np.array([code[v] for v in labels], dtype=np.int64)
    return LabeledDataset(X, y, schema, class_names, header[t])


def load_features(path, schema, target=None, class_names=None):
    """Encode a file for prediction with an existing schema.

    Returns ``(X, y)``; ``y`` is None unless the target column is present and
    every value is a known class.
    """
    header, body = read_rows(path)
    if not body:
        raise ParseError(f"{Path(path).name} has no data rows")
    _check_missing(header, body)
    X = encode_rows(body, schema, header)
    y = None
    if target is not None and target in header and class_names is not None:
        t = header.index(target)
        code = {c: i + 1 for i, c in enumerate(class_names)}
        values = [r[t].strip() for r in body]
        if all(v in code for v in values):
            y = np.array([code[v] for v in values], dtype=np.int64)
    return X, y


def decode_categoricals(X, schema):
    """Recover the original category strings of every categorical column."""
    out = {}
    offset = 0
    for col in schema:
        if col.kind == "categorical":
            block = X[:, offset:offset + col.width]
            out[col.name] = [col.categories[i] for i in np.argmax(block, axis=1)]
        offset += col.width
    return out


def repetitions_for(n):
    if n < 500:
        return 50
    if n < 1000:
        return 20
    if n < 5000:
        return 10
    return 5


def split_indices(n, plan, rep_index, seed):
    """Shuffle keyed by ``(seed, rep_index)``, cut 70/30, then cap each side."""
    perm = SplitMix64(seed, rep_index).permutation(n)
    n_train = int(math.floor(round(plan.train_fraction * n, 9)))
    train = perm[:n_train][:plan.train_cap]
    test = perm[n_train:][:plan.test_cap]
    if train.size == 0 or test.size == 0:
        raise TooSmall(f"split of n={n} leaves an empty side")
    return train, test


def split(ds, plan, rep_index, seed):
    train, test = split_indices(ds.X.shape[0], plan, rep_index, seed)
    return ds.subset(train), ds.subset(test)


@dataclass(frozen=True)
class ZScore:
    """Column standardisation fitted on training data; constant columns are left unscaled."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        sd = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["mean"], dtype=np.float64), np.array(data["scale"], dtype=np.float64))
