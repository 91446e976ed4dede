"""Concept-variation transferability score.

Each example receives v(x_i): the distance-weighted fraction of other
examples carrying a different label, with weights w_ij = 2^(-alpha *
D_ij / max(sqrt(d) - D_ij, epsilon)) over Euclidean distances on per-feature
min-max normalized embeddings. The transferability score is the population
standard deviation of the v values; higher is better.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .data import EmbeddingMatrix, LabeledDataset, ScoreReport
from .distances import DEFAULT_MEMORY_CAP, DistanceMetric, pairwise_distances
from .errors import OutOfRange, UndefinedScore

_LN2 = math.log(2.0)


class Normalization(enum.Enum):
    PER_FEATURE_MIN_MAX = "per_feature_min_max"


@dataclass(frozen=True)
class CvConfig:
    alpha: float = 2.0
    epsilon: float = 1e-10
    normalization: Normalization = Normalization.PER_FEATURE_MIN_MAX

    def __post_init__(self):
        if not self.alpha > 0:
            raise OutOfRange(f"alpha must be > 0, got {self.alpha}")
        if not self.epsilon > 0:
            raise OutOfRange(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class CvResult:
    per_example: np.ndarray
    mean: float
    std: float
    n_degenerate_rows: int


def _weights_inplace(
    buffer: np.ndarray, dim: int, alpha: float, epsilon: float
) -> np.ndarray:
    """Turn a distance buffer into weights 2^(-alpha*D/max(sqrt(dim)-D, eps))."""
    div = np.sqrt(dim) - buffer
    np.maximum(div, epsilon, out=div)
    np.divide(buffer, div, out=buffer)
    del div
    np.multiply(buffer, -(alpha * _LN2), out=buffer)
    np.exp(buffer, out=buffer)
    return buffer


def weight_function(
    distances, dim: int, *, alpha: float = 2.0, epsilon: float = 1e-10
) -> np.ndarray:
    """Neighbor weight for a distance on dim-dimensional normalized data.

    Equals 1 at distance 0 and underflows to exactly 0 at distance sqrt(dim);
    strictly decreasing in the distance on [0, sqrt(dim)) and in alpha.
    """
    if not alpha > 0:
        raise OutOfRange(f"alpha must be > 0, got {alpha}")
    if not epsilon > 0:
        raise OutOfRange(f"epsilon must be > 0, got {epsilon}")
    buffer = np.atleast_1d(np.array(distances, dtype=np.float64, copy=True))
    weights = _weights_inplace(buffer, dim, alpha, epsilon)
    return weights if np.ndim(distances) else weights[0]


def normalize_min_max(x) -> EmbeddingMatrix:
    """Scale each feature to [0, 1]; constant features map to 0.0."""
    values = x.values if isinstance(x, EmbeddingMatrix) else np.asarray(x, np.float64)
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    span = np.where(span == 0.0, 1.0, span)
    return EmbeddingMatrix.from_array((values - lo) / span)


def concept_variation(
    ds: LabeledDataset,
    cfg: CvConfig = CvConfig(),
    *,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> CvResult:
    """Per-example concept variation and its population statistics.

    Rows whose weights all underflow to zero (every other point at clamped
    distance) are defined as v = 0 and counted in ``n_degenerate_rows``.
    """
    n = ds.n
    if n < 2:
        raise UndefinedScore(
            "too_few_points", "concept variation needs at least 2 examples"
        )
    normalized = normalize_min_max(ds.embeddings)
    dim = normalized.dim
    # Weight pass reuses the distance buffer in place.
    w = pairwise_distances(
        normalized, DistanceMetric.EUCLIDEAN, memory_cap=memory_cap
    ).values
    _weights_inplace(w, dim, cfg.alpha, cfg.epsilon)
    np.fill_diagonal(w, 0.0)

    # One product gives, per row, the weight mass on each *other* class
    # (complement one-hot columns) and the total mass (final ones column).
    # Sharing one accumulation order keeps numerator <= denominator bitwise
    # and makes v exactly 0 when all labels agree.
    indices = ds.labels.indices
    hot = np.ones((n, ds.n_classes + 1), dtype=np.float64)
    hot[np.arange(n), indices] = 0.0
    with threadpool_limits(limits=1, user_api="blas"):
        sums = w @ hot
    other = sums[np.arange(n), indices]
    totals = sums[:, -1]

    degenerate = totals == 0.0
    n_degenerate = int(np.count_nonzero(degenerate))
    safe_totals = np.where(degenerate, 1.0, totals)
    v = other / safe_totals
    v[degenerate] = 0.0
    return CvResult(
        per_example=v,
        mean=float(v.mean()),
        std=float(v.std()),  # population std: divisor N
        n_degenerate_rows=n_degenerate,
    )


def cv_score(
    ds: LabeledDataset,
    cfg: CvConfig = CvConfig(),
    *,
    model_id: str = "",
    memory_cap: int = DEFAULT_MEMORY_CAP,
    negate: bool = False,
) -> ScoreReport:
    """Score = population std of v (negated when ``negate`` for callers that
    want lower-variation-is-better orientation); undefined when N < 2."""
    start = time.perf_counter()
    params = {
        "alpha": cfg.alpha,
        "epsilon": cfg.epsilon,
        "normalization": cfg.normalization.value,
        "negated": negate,
    }
    try:
        result = concept_variation(ds, cfg, memory_cap=memory_cap)
    except UndefinedScore as exc:
        return ScoreReport(
            model_id=model_id,
            metric="CV",
            score=None,
            undefined=True,
            undefined_reason=exc.reason,
            params=params,
            n_samples=ds.n,
            n_classes=ds.n_classes,
            dim=ds.dim,
            wall_time_s=max(time.perf_counter() - start, 1e-9),
            warnings=(),
        )
    warnings: tuple[str, ...] = ()
    if result.n_degenerate_rows:
        warnings = (f"degenerate_weight_rows={result.n_degenerate_rows}",)
    score = -result.std if negate else result.std
    return ScoreReport(
        model_id=model_id,
        metric="CV",
        score=score,
        undefined=False,
        undefined_reason=None,
        params=params,
        n_samples=ds.n,
        n_classes=ds.n_classes,
        dim=ds.dim,
        wall_time_s=max(time.perf_counter() - start, 1e-9),
        warnings=warnings,
    )
