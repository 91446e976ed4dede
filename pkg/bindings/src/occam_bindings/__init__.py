"""In-memory bindings for the occam transferability scorer.

Exposes the scoring and ranking API directly on numpy arrays for workflows
that already hold embeddings in memory, skipping the CLI's file round-trip:

- ``int_score(embeddings, labels, distance="euclidean") -> float``
- ``concept_variation_score(embeddings, labels, alpha=2.0) -> float``
- ``rank_zoo([(model_id, embeddings, labels), ...], metric="int")
  -> [(model_id, score), ...]``

Results are bit-identical to the CLI's JSON output on the same data: both go
through the same float64 pipeline with the same summation order.

Array hand-off is zero-copy when the input already satisfies the boundary
contract (2-D float32/float64 embeddings, 1-D integer labels, C-contiguous).
Inputs that need a dtype or layout conversion are rejected with a clear
argument error unless the caller opts in with ``allow_copy=True``, in which
case exactly one validated copy is made and a ``BindingCopyWarning`` is
emitted.

Errors map 1:1 onto the native library's taxonomy: the exception classes
re-exported here *are* the library's classes (``UndefinedScore``,
``NonFinite``, ``LengthMismatch``, ...). Undefined scores, which the report
API flags rather than raises, surface here as raised ``UndefinedScore``.

No locks are added around native computation; the heavy numerical kernels
release the interpreter lock inside their BLAS/vector loops, and the native
side keeps its bitwise determinism contract.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from occam import __version__ as _native_version
from occam import (
    CapacityExceeded,
    CvConfig,
    DistanceMetric,
    EmptyGroup,
    IntScoreConfig,
    LabeledDataset,
    LengthMismatch,
    NegativeLabel,
    NonFinite,
    OccamError,
    OutOfRange,
    UndefinedScore,
    WrongRank,
    cv_score as _native_cv_score,
    int_score as _native_int_score,
)

__version__ = _native_version

__all__ = [
    "__version__",
    "BoundArray",
    "BindingCopyWarning",
    "int_score",
    "concept_variation_score",
    "rank_zoo",
    # native error taxonomy, re-exported 1:1
    "OccamError",
    "UndefinedScore",
    "NonFinite",
    "WrongRank",
    "LengthMismatch",
    "NegativeLabel",
    "OutOfRange",
    "CapacityExceeded",
    "EmptyGroup",
]

_EMBEDDING_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


class BindingCopyWarning(UserWarning):
    """Emitted when an input array had to be copied to cross the boundary."""


@dataclass(frozen=True)
class BoundArray:
    """A host array validated for the binding boundary.

    ``values`` aliases the caller's buffer whenever dtype and contiguity
    already match (``copied`` False); otherwise it is the single validated
    copy the caller explicitly allowed (``copied`` True).
    """

    values: np.ndarray
    copied: bool

    @staticmethod
    def bind_embeddings(arr, *, allow_copy: bool = False) -> "BoundArray":
        return _bind(arr, "embeddings", allow_copy=allow_copy)

    @staticmethod
    def bind_labels(arr, *, allow_copy: bool = False) -> "BoundArray":
        return _bind(arr, "labels", allow_copy=allow_copy)


def _bind(arr, kind: str, *, allow_copy: bool) -> BoundArray:
    if not isinstance(arr, np.ndarray):
        raise TypeError(f"{kind} must be a numpy.ndarray, got {type(arr).__name__}")
    if kind == "embeddings":
        if arr.ndim != 2:
            raise WrongRank(f"embeddings must be 2-D, got {arr.ndim}-D")
        if arr.dtype not in _EMBEDDING_DTYPES:
            raise TypeError(
                f"embeddings must be float32 or float64, got dtype {arr.dtype}"
            )
    else:
        if arr.ndim != 1:
            raise WrongRank(f"labels must be 1-D, got {arr.ndim}-D")
        if arr.dtype == bool or not np.issubdtype(arr.dtype, np.integer):
            raise TypeError(f"labels must be integers, got dtype {arr.dtype}")
    if arr.flags.c_contiguous:
        return BoundArray(arr, copied=False)
    if not allow_copy:
        raise ValueError(
            f"{kind} array is not C-contiguous; pass a contiguous array or set "
            f"allow_copy=True to accept one validated copy"
        )
    warnings.warn(
        f"copying non-contiguous {kind} array across the binding boundary",
        BindingCopyWarning,
        stacklevel=3,
    )
    return BoundArray(np.ascontiguousarray(arr), copied=True)


def _dataset(embeddings, labels, *, allow_copy: bool) -> LabeledDataset:
    bound_x = _bind(embeddings, "embeddings", allow_copy=allow_copy)
    bound_y = _bind(labels, "labels", allow_copy=allow_copy)
    return LabeledDataset.from_arrays(bound_x.values, bound_y.values)


def _score_or_raise(report) -> float:
    if report.undefined:
        raise UndefinedScore(report.undefined_reason, f"{report.metric} score is "
                             f"undefined: {report.undefined_reason}")
    return report.score


def int_score(
    embeddings,
    labels,
    distance: str = "euclidean",
    *,
    allow_copy: bool = False,
) -> float:
    """Mean cross-class distance of a labeled embedding (higher = more
    separable). Raises UndefinedScore for single-class input."""
    ds = _dataset(embeddings, labels, allow_copy=allow_copy)
    cfg = IntScoreConfig(DistanceMetric.parse(distance))
    return _score_or_raise(_native_int_score(ds, cfg))


def concept_variation_score(
    embeddings,
    labels,
    alpha: float = 2.0,
    *,
    allow_copy: bool = False,
) -> float:
    """Spread (population std) of per-example neighborhood label disagreement
    (higher = more locally entangled classes). Raises UndefinedScore for
    fewer than two points."""
    ds = _dataset(embeddings, labels, allow_copy=allow_copy)
    return _score_or_raise(_native_cv_score(ds, CvConfig(alpha=alpha)))


def rank_zoo(
    entries,
    metric: str = "int",
    *,
    allow_copy: bool = False,
) -> list[tuple[str, float | None]]:
    """Rank in-memory (model_id, embeddings, labels) triples.

    Returns (model_id, score) pairs sorted by score descending with ties
    broken by model_id; entries whose score is undefined come last, in
    model_id order, with score None. The order and the float values match
    the CLI's rank command on the same data.
    """
    metric = metric.upper()
    if metric not in ("INT", "CV", "COMBINED"):
        raise ValueError(f"unknown ranking metric {metric!r}; "
                         f"expected 'int', 'cv', or 'combined'")
    if not entries:
        raise ValueError("entries must be a non-empty list of "
                         "(model_id, embeddings, labels) triples")
    seen: set[str] = set()
    reports: list[tuple[str, dict]] = []
    for item in entries:
        try:
            model_id, embeddings, labels = item
        except (TypeError, ValueError):
            raise ValueError(
                "each entry must be a (model_id, embeddings, labels) triple"
            ) from None
        if not isinstance(model_id, str) or not model_id:
            raise ValueError("model_id must be a non-empty string")
        if model_id in seen:
            raise ValueError(f"duplicate model_id {model_id!r}")
        seen.add(model_id)
        ds = _dataset(embeddings, labels, allow_copy=allow_copy)
        per_metric: dict = {}
        if metric in ("INT", "COMBINED"):
            per_metric["INT"] = _native_int_score(ds, IntScoreConfig())
        if metric in ("CV", "COMBINED"):
            per_metric["CV"] = _native_cv_score(ds, CvConfig())
        reports.append((model_id, per_metric))

    if metric == "COMBINED":
        defined = [
            (m, r) for m, r in reports
            if not r["INT"].undefined and not r["CV"].undefined
        ]
        norm_int = _min_max({m: r["INT"].score for m, r in defined})
        norm_cv = _min_max({m: r["CV"].score for m, r in defined})
        scored = [
            (m, norm_int[m] + norm_cv[m] if m in norm_int else None)
            for m, _ in reports
        ]
    else:
        scored = [
            (m, None if r[metric].undefined else r[metric].score)
            for m, r in reports
        ]

    defined_part = sorted(
        ((m, s) for m, s in scored if s is not None), key=lambda t: (-t[1], t[0])
    )
    undefined_part = sorted((m, s) for m, s in scored if s is None)
    return defined_part + undefined_part


def _min_max(raw: dict[str, float]) -> dict[str, float]:
    if not raw:
        return {}
    lo = min(raw.values())
    hi = max(raw.values())
    if hi == lo:
        return {k: 0.0 for k in raw}
    return {k: (v - lo) / (hi - lo) for k, v in raw.items()}
