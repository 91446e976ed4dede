"""Pairwise and cross-group distance kernels.

Determinism contract: for a fixed input, results are bit-identical across
runs, thread counts, and block sizes. Two rules enforce this:

* every matrix product runs with the BLAS pool pinned to one thread and a
  shape that depends only on the input groups, never on block size or worker
  count;
* block size only chunks elementwise post-processing and per-row reductions,
  which numpy evaluates row-independently, so partial results concatenate to
  the unchunked answer bit-for-bit.

The cross-group path streams per-row sums and never materializes anything
larger than one group-pair block; the full-matrix path allocates N x N and is
guarded by a memory cap.
"""

from __future__ import annotations

import enum

import numpy as np
from threadpoolctl import threadpool_limits

from .data import EmbeddingMatrix
from .errors import CapacityExceeded, EmptyGroup, OutOfRange

DEFAULT_MEMORY_CAP = 8 << 30  # bytes
DEFAULT_BLOCK_ROWS = 256


class DistanceMetric(enum.Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "sqeuclidean"
    MANHATTAN = "manhattan"
    COSINE = "cosine"

    @staticmethod
    def parse(name: str) -> "DistanceMetric":
        key = name.strip().lower()
        aliases = {
            "euclidean": DistanceMetric.EUCLIDEAN,
            "sqeuclidean": DistanceMetric.SQUARED_EUCLIDEAN,
            "squared_euclidean": DistanceMetric.SQUARED_EUCLIDEAN,
            "manhattan": DistanceMetric.MANHATTAN,
            "cosine": DistanceMetric.COSINE,
        }
        if key not in aliases:
            raise OutOfRange(
                f"unknown distance metric {name!r}; expected one of "
                "euclidean, sqeuclidean, manhattan, cosine"
            )
        return aliases[key]


def _as_values(x) -> np.ndarray:
    if isinstance(x, EmbeddingMatrix):
        return x.values
    return EmbeddingMatrix.from_array(x).values


def _row_norms_sq(x: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", x, x)


def _unit_rows(x: np.ndarray) -> tuple[np.ndarray, int]:
    """Row-normalize; zero-norm rows stay zero and are counted."""
    norms = np.sqrt(_row_norms_sq(x))
    n_zero = int(np.count_nonzero(norms == 0.0))
    safe = np.where(norms == 0.0, 1.0, norms)
    return x / safe[:, None], n_zero


def check_capacity(n_bytes: int, memory_cap: int, what: str) -> None:
    if n_bytes > memory_cap:
        raise CapacityExceeded(
            f"{what} needs {n_bytes} bytes, exceeding the {memory_cap}-byte cap"
        )


class DistanceMatrix:
    """Symmetric N x N distance matrix with zero diagonal."""

    __slots__ = ("values", "n_zero_norm_rows")

    def __init__(self, values: np.ndarray, n_zero_norm_rows: int = 0):
        self.values = values
        self.n_zero_norm_rows = n_zero_norm_rows

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_distances(
    x,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    *,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> DistanceMatrix:
    """Full N x N distance matrix (symmetric, zero diagonal)."""
    values = _as_values(x)
    n = values.shape[0]
    check_capacity(n * n * 8, memory_cap, f"{n}x{n} distance matrix")
    n_zero = 0
    with threadpool_limits(limits=1, user_api="blas"):
        if metric in (DistanceMetric.EUCLIDEAN, DistanceMetric.SQUARED_EUCLIDEAN):
            norms = _row_norms_sq(values)
            d = values @ values.T
            np.multiply(d, -2.0, out=d)
            d += norms[:, None]
            d += norms[None, :]
            np.maximum(d, 0.0, out=d)
            if metric is DistanceMetric.EUCLIDEAN:
                np.sqrt(d, out=d)
        elif metric is DistanceMetric.MANHATTAN:
            d = np.empty((n, n), dtype=np.float64)
            for i in range(n):
                d[i] = np.abs(values - values[i]).sum(axis=1)
        else:  # COSINE
            unit, n_zero = _unit_rows(values)
            d = unit @ unit.T
            np.subtract(1.0, d, out=d)
            np.clip(d, 0.0, 2.0, out=d)
    # Exact symmetry by construction: keep the upper triangle, mirror it.
    upper = np.triu(d, 1)
    d = upper + upper.T
    return DistanceMatrix(d, n_zero)


def _cross_row_sums(
    a: np.ndarray, b: np.ndarray, metric: DistanceMetric, block_rows: int
) -> np.ndarray:
    """sum_j dist(a_i, b_j) for each row i, chunking only the elementwise pass."""
    n_a = a.shape[0]
    sums = np.empty(n_a, dtype=np.float64)
    if metric in (DistanceMetric.EUCLIDEAN, DistanceMetric.SQUARED_EUCLIDEAN):
        a_norms = _row_norms_sq(a)
        b_norms = _row_norms_sq(b)
        gram = a @ b.T  # one product per group pair: shape fixed by the groups
        for start in range(0, n_a, block_rows):
            stop = min(start + block_rows, n_a)
            blk = a_norms[start:stop, None] + b_norms[None, :] - 2.0 * gram[start:stop]
            np.maximum(blk, 0.0, out=blk)
            if metric is DistanceMetric.EUCLIDEAN:
                np.sqrt(blk, out=blk)
            sums[start:stop] = blk.sum(axis=1)
    elif metric is DistanceMetric.MANHATTAN:
        for i in range(n_a):
            sums[i] = np.abs(b - a[i]).sum()
    else:  # COSINE
        unit_a, _ = _unit_rows(a)
        unit_b, _ = _unit_rows(b)
        gram = unit_a @ unit_b.T
        for start in range(0, n_a, block_rows):
            stop = min(start + block_rows, n_a)
            blk = 1.0 - gram[start:stop]
            np.clip(blk, 0.0, 2.0, out=blk)
            sums[start:stop] = blk.sum(axis=1)
    return sums


def cross_group_mean_distance(
    x,
    idx_a,
    idx_b,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    *,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> float:
    """Mean distance over all cross pairs (i in a, j in b)."""
    values = _as_values(x)
    idx_a = np.asarray(idx_a, dtype=np.int64)
    idx_b = np.asarray(idx_b, dtype=np.int64)
    if idx_a.size == 0 or idx_b.size == 0:
        raise EmptyGroup("cross-group distance requires two non-empty groups")
    for name, idx in (("idx_a", idx_a), ("idx_b", idx_b)):
        if idx.min() < 0 or idx.max() >= values.shape[0]:
            raise OutOfRange(f"{name} contains indices outside [0, {values.shape[0]})")
    if np.intersect1d(idx_a, idx_b).size:
        raise OutOfRange("groups must be disjoint")
    if block_rows < 1:
        raise OutOfRange(f"block_rows must be >= 1, got {block_rows}")
    a = values[idx_a]
    b = values[idx_b]
    check_capacity(
        a.shape[0] * b.shape[0] * 8, memory_cap, f"{a.shape[0]}x{b.shape[0]} pair block"
    )
    with threadpool_limits(limits=1, user_api="blas"):
        sums = _cross_row_sums(a, b, metric, block_rows)
    return float(np.sum(sums) / (a.shape[0] * b.shape[0]))


def count_zero_norm_rows(x) -> int:
    """Rows with zero L2 norm (cosine warning support)."""
    values = _as_values(x)
    return int(np.count_nonzero(_row_norms_sq(values) == 0.0))
