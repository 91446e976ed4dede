"""Core data structures and file IO.

Embeddings and labels are held in immutable wrappers that validate once at
construction: embeddings as float64 C-contiguous 2-D arrays with finite
entries, labels as non-negative int64 vectors remapped internally to
contiguous class indices 0..C-1 (original ids are preserved for reporting).

Files are accepted as .npy (sniffed by magic bytes) or CSV with an optional
auto-detected single header line.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    LengthMismatch,
    MalformedFile,
    NegativeLabel,
    NonFinite,
    OutOfRange,
    WrongRank,
)

_NPY_MAGIC = b"\x93NUMPY"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x d matrix of float64 feature vectors, finite and read-only."""

    values: np.ndarray

    @staticmethod
    def from_array(arr) -> "EmbeddingMatrix":
        values = np.asarray(arr)
        if values.ndim != 2:
            raise WrongRank(f"embeddings must be 2-D, got {values.ndim}-D")
        if not np.issubdtype(values.dtype, np.floating) and not np.issubdtype(
            values.dtype, np.integer
        ):
            raise TypeError(f"embeddings must be real-valued, got dtype {values.dtype}")
        values = values.astype(np.float64, copy=values.dtype == np.float64)
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise WrongRank(f"embeddings must be non-empty, got shape {values.shape}")
        if not np.isfinite(values).all():
            bad = int(np.size(values) - np.isfinite(values).sum())
            raise NonFinite(f"embeddings contain {bad} non-finite value(s)")
        return EmbeddingMatrix(_freeze(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Per-row class labels.

    ``ids`` keeps the original non-negative integer labels; ``indices`` is the
    contiguous remap 0..C-1 used internally (class order = ascending id);
    ``classes`` lists the original ids in that order.
    """

    ids: np.ndarray
    classes: np.ndarray = field(init=False)
    indices: np.ndarray = field(init=False)

    def __post_init__(self):
        ids = np.asarray(self.ids)
        if ids.ndim != 1:
            raise WrongRank(f"labels must be 1-D, got {ids.ndim}-D")
        if ids.shape[0] < 1:
            raise WrongRank("labels must be non-empty")
        if ids.dtype == bool or not np.issubdtype(ids.dtype, np.integer):
            raise TypeError(f"labels must be integers, got dtype {ids.dtype}")
        ids = ids.astype(np.int64, copy=ids.dtype == np.int64)
        if (ids < 0).any():
            raise NegativeLabel(f"labels must be non-negative, found {int(ids.min())}")
        classes, indices = np.unique(ids, return_inverse=True)
        object.__setattr__(self, "ids", _freeze(ids))
        object.__setattr__(self, "classes", _freeze(classes))
        object.__setattr__(self, "indices", _freeze(indices.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.ids.shape[0]

    @property
    def n_classes(self) -> int:
        return self.classes.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    """Embeddings paired with aligned labels."""

    embeddings: EmbeddingMatrix
    labels: LabelVector

    def __post_init__(self):
        if self.embeddings.n != self.labels.n:
            raise LengthMismatch(
                f"{self.embeddings.n} embedding rows vs {self.labels.n} labels"
            )

    @staticmethod
    def from_arrays(embeddings, labels) -> "LabeledDataset":
        return LabeledDataset(
            EmbeddingMatrix.from_array(embeddings), LabelVector(np.asarray(labels))
        )

    @property
    def n(self) -> int:
        return self.embeddings.n

    @property
    def dim(self) -> int:
        return self.embeddings.dim

    @property
    def n_classes(self) -> int:
        return self.labels.n_classes

    def class_rows(self) -> list[np.ndarray]:
        """Row indices per class, ordered by ascending class id."""
        order = np.argsort(self.labels.indices, kind="stable")
        bounds = np.searchsorted(
            self.labels.indices[order], np.arange(self.labels.n_classes + 1)
        )
        return [order[bounds[c] : bounds[c + 1]] for c in range(self.labels.n_classes)]

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return LabeledDataset.from_arrays(
            self.embeddings.values[rows], self.labels.ids[rows]
        )


@dataclass(frozen=True)
class ScoreReport:
    """Outcome of scoring one dataset with one metric."""

    model_id: str
    metric: str
    score: float | None
    undefined: bool
    undefined_reason: str | None
    params: dict
    n_samples: int
    n_classes: int
    dim: int
    wall_time_s: float
    warnings: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "metric": self.metric,
            "score": self.score,
            "undefined": self.undefined,
            "undefined_reason": self.undefined_reason,
            "params": dict(self.params),
            "n_samples": self.n_samples,
            "n_classes": self.n_classes,
            "dim": self.dim,
            "wall_time_s": self.wall_time_s,
            "warnings": list(self.warnings),
        }


def _read_text_rows(path: Path) -> list[list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFile(f"{path}: not valid UTF-8 text: {exc}") from None
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise MalformedFile(f"{path}: empty file")
    return rows


def _is_npy(path: Path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(len(_NPY_MAGIC)) == _NPY_MAGIC
    except OSError as exc:
        raise MalformedFile(f"{path}: {exc}") from None


def _load_npy(path: Path) -> np.ndarray:
    try:
        return np.load(path, allow_pickle=False)
    except (ValueError, OSError, EOFError) as exc:
        raise MalformedFile(f"{path}: invalid .npy file: {exc}") from None


def load_embeddings(path) -> EmbeddingMatrix:
    """Load an embedding matrix from .npy (float32/float64) or CSV."""
    path = Path(path)
    if _is_npy(path):
        arr = _load_npy(path)
        if arr.ndim != 2:
            raise WrongRank(f"{path}: embeddings must be 2-D, got {arr.ndim}-D")
        if arr.dtype not in (np.float32, np.float64):
            raise MalformedFile(
                f"{path}: embeddings must be float32 or float64, got {arr.dtype}"
            )
        return EmbeddingMatrix.from_array(arr)

    rows = _read_text_rows(path)
    start = 0
    try:
        [float(tok) for tok in rows[0]]
    except ValueError:
        start = 1  # header line
    if start == len(rows):
        raise MalformedFile(f"{path}: no data rows")
    width = len(rows[start])
    data = np.empty((len(rows) - start, width), dtype=np.float64)
    for i, row in enumerate(rows[start:]):
        if len(row) != width:
            raise MalformedFile(
                f"{path}: row {start + i + 1} has {len(row)} fields, expected {width}"
            )
        try:
            data[i] = [float(tok) for tok in row]
        except ValueError as exc:
            raise MalformedFile(f"{path}: row {start + i + 1}: {exc}") from None
    return EmbeddingMatrix.from_array(data)


def load_labels(path, n_expected: int | None = None) -> LabelVector:
    """Load a label vector from .npy (integer) or single-column CSV."""
    path = Path(path)
    if _is_npy(path):
        arr = _load_npy(path)
        if arr.ndim != 1:
            raise WrongRank(f"{path}: labels must be 1-D, got {arr.ndim}-D")
        if arr.dtype == bool or not np.issubdtype(arr.dtype, np.integer):
            raise MalformedFile(f"{path}: labels must be integers, got {arr.dtype}")
        labels = LabelVector(arr)
    else:
        rows = _read_text_rows(path)
        start = 0
        if len(rows[0]) != 1 or not _parses_as_int(rows[0][0]):
            start = 1  # header line
        if start == len(rows):
            raise MalformedFile(f"{path}: no data rows")
        ids = np.empty(len(rows) - start, dtype=np.int64)
        for i, row in enumerate(rows[start:]):
            if len(row) != 1 or not _parses_as_int(row[0]):
                raise MalformedFile(
                    f"{path}: row {start + i + 1}: expected a single integer"
                )
            ids[i] = int(row[0])
        labels = LabelVector(ids)
    if n_expected is not None and labels.n != n_expected:
        raise LengthMismatch(
            f"{path}: {labels.n} labels for {n_expected} embedding rows"
        )
    return labels


def _parses_as_int(tok: str) -> bool:
    try:
        int(tok.strip())
        return True
    except ValueError:
        return False


def load_vector(path) -> np.ndarray:
    """Load a 1-D float64 vector from .npy or single-column CSV."""
    path = Path(path)
    if _is_npy(path):
        arr = _load_npy(path)
        if arr.ndim != 1:
            raise WrongRank(f"{path}: expected a 1-D vector, got {arr.ndim}-D")
        if not (
            np.issubdtype(arr.dtype, np.floating)
            or np.issubdtype(arr.dtype, np.integer)
        ):
            raise MalformedFile(f"{path}: expected numeric values, got {arr.dtype}")
        values = arr.astype(np.float64)
    else:
        rows = _read_text_rows(path)
        start = 0
        try:
            float(rows[0][0])
            if len(rows[0]) != 1:
                raise ValueError
        except ValueError:
            start = 1  # header line
        if start == len(rows):
            raise MalformedFile(f"{path}: no data rows")
        values = np.empty(len(rows) - start, dtype=np.float64)
        for i, row in enumerate(rows[start:]):
            try:
                if len(row) != 1:
                    raise ValueError(f"{len(row)} fields")
                values[i] = float(row[0])
            except ValueError as exc:
                raise MalformedFile(f"{path}: row {start + i + 1}: {exc}") from None
    if not np.isfinite(values).all():
        raise NonFinite(f"{path}: vector contains non-finite values")
    return values


def load_dataset(embeddings_path, labels_path) -> LabeledDataset:
    embeddings = load_embeddings(embeddings_path)
    labels = load_labels(labels_path, n_expected=embeddings.n)
    return LabeledDataset(embeddings, labels)


def save_embeddings(path, values) -> None:
    np.save(path, np.asarray(values, dtype=np.float64))


def save_labels(path, ids) -> None:
    np.save(path, np.asarray(ids, dtype=np.int64))


def load_score_map(path) -> dict[str, float]:
    """Load a JSON object mapping model id to a finite numeric score."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or not obj:
        raise MalformedFile(f"{path}: expected a non-empty JSON object")
    out: dict[str, float] = {}
    for key, value in obj.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise MalformedFile(f"{path}: score for {key!r} is not a number")
        value = float(value)
        if not np.isfinite(value):
            raise NonFinite(f"{path}: score for {key!r} is not finite")
        out[key] = value
    return out


def load_ground_truth(path) -> dict[str, float]:
    """Load ground-truth accuracies: JSON object model id -> accuracy in [0,1]."""
    scores = load_score_map(path)
    for key, value in scores.items():
        if not 0.0 <= value <= 1.0:
            raise OutOfRange(f"{path}: accuracy for {key!r} is {value}, not in [0,1]")
    return scores
