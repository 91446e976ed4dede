"""Interclass-distance transferability score (INT).

For every unordered class pair (a, b) the engine computes the mean distance
over all cross-class point pairs; the score aggregates those pair means
either as their average (MeanOverPairs, the default) or as the ordered-pair
sum (RawOrderedSum, exactly twice the pair-mean total). Higher scores mean
classes sit farther apart in embedding space.
"""

from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset, ScoreReport
from .distances import (
    DEFAULT_BLOCK_ROWS,
    DEFAULT_MEMORY_CAP,
    DistanceMetric,
    count_zero_norm_rows,
    cross_group_mean_distance,
)
from .errors import OutOfRange, UndefinedScore


class Aggregation(enum.Enum):
    MEAN_OVER_PAIRS = "mean"
    RAW_ORDERED_SUM = "raw"

    @staticmethod
    def parse(name: str) -> "Aggregation":
        key = name.strip().lower()
        if key in ("mean", "mean_over_pairs"):
            return Aggregation.MEAN_OVER_PAIRS
        if key in ("raw", "raw_ordered_sum"):
            return Aggregation.RAW_ORDERED_SUM
        raise OutOfRange(f"unknown aggregation {name!r}; expected 'mean' or 'raw'")


@dataclass(frozen=True)
class IntScoreConfig:
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    aggregation: Aggregation = Aggregation.MEAN_OVER_PAIRS


def interclass_mean_distances(
    ds: LabeledDataset,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    *,
    threads: int = 0,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> np.ndarray:
    """Mean cross-class distance for each unordered class pair.

    Returned in ascending (a, b) order over remapped class indices. Class
    pairs may be evaluated concurrently; results land in index-addressed
    slots so worker count never affects the output.
    """
    n_classes = ds.n_classes
    if n_classes < 2:
        raise UndefinedScore(
            "single_class", "interclass distance needs at least 2 classes"
        )
    rows = ds.class_rows()
    pairs = [(a, b) for a in range(n_classes) for b in range(a + 1, n_classes)]
    values = ds.embeddings

    def one_pair(pair: tuple[int, int]) -> float:
        a, b = pair
        return cross_group_mean_distance(
            values,
            rows[a],
            rows[b],
            metric,
            block_rows=block_rows,
            memory_cap=memory_cap,
        )

    if threads == 1 or len(pairs) == 1:
        means = [one_pair(p) for p in pairs]
    else:
        workers = threads if threads > 0 else min(32, (len(pairs) + 1) // 2)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            means = list(pool.map(one_pair, pairs))
    return np.asarray(means, dtype=np.float64)


def int_score(
    ds: LabeledDataset,
    cfg: IntScoreConfig = IntScoreConfig(),
    *,
    model_id: str = "",
    threads: int = 0,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> ScoreReport:
    """Score a labeled embedding set; undefined (flagged) when C = 1."""
    start = time.perf_counter()
    params = {
        "distance": cfg.metric.value,
        "aggregation": cfg.aggregation.value,
    }
    warnings: tuple[str, ...] = ()
    if cfg.metric is DistanceMetric.COSINE:
        n_zero = count_zero_norm_rows(ds.embeddings)
        if n_zero:
            warnings = (f"cosine_zero_norm_rows={n_zero}",)
    try:
        means = interclass_mean_distances(
            ds,
            cfg.metric,
            threads=threads,
            block_rows=block_rows,
            memory_cap=memory_cap,
        )
    except UndefinedScore as exc:
        return ScoreReport(
            model_id=model_id,
            metric="INT",
            score=None,
            undefined=True,
            undefined_reason=exc.reason,
            params=params,
            n_samples=ds.n,
            n_classes=ds.n_classes,
            dim=ds.dim,
            wall_time_s=max(time.perf_counter() - start, 1e-9),
            warnings=warnings,
        )
    total = float(np.sum(means))
    c = ds.n_classes
    # Written so mean == raw / (C*(C-1)) holds bitwise, not just approximately.
    if cfg.aggregation is Aggregation.MEAN_OVER_PAIRS:
        score = (2.0 * total) / (c * (c - 1.0))
    else:
        score = 2.0 * total
    return ScoreReport(
        model_id=model_id,
        metric="INT",
        score=score,
        undefined=False,
        undefined_reason=None,
        params=params,
        n_samples=ds.n,
        n_classes=c,
        dim=ds.dim,
        wall_time_s=max(time.perf_counter() - start, 1e-9),
        warnings=warnings,
    )
