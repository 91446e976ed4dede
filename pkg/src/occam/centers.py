"""Nearest-center view of a softmax classification head.

From a head (W, b) with full column rank, constructs class centers
mu_c = W_c + v where v is the minimum-norm solution of W^T v = u with
u_c = b_c - 0.5*||W_c||^2. Verifiers then measure, per point, whether
argmax_c (x.W_c + b_c) matches argmin_c ||x - mu_c||^2 and how closely the
softmax confidences match the distance-based ones. Confidence equality is
exact only for uniform biases; for general biases the deviation is measured
and reported, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .data import EmbeddingMatrix
from .errors import LengthMismatch, NonFinite, RankDeficient, NoSolution, WrongRank

RANK_TOL = 1e-10
RESIDUAL_TOL = 1e-8
GAP_TOL = 1e-9


@dataclass(frozen=True)
class SoftmaxHead:
    """Weights d x C (columns are class weight vectors) and length-C bias."""

    weights: np.ndarray
    bias: np.ndarray

    @staticmethod
    def from_arrays(weights, bias) -> "SoftmaxHead":
        w = np.asarray(weights, dtype=np.float64)
        b = np.asarray(bias, dtype=np.float64)
        if w.ndim != 2:
            raise WrongRank(f"weights must be 2-D (d x C), got {w.ndim}-D")
        if b.ndim != 1:
            raise WrongRank(f"bias must be 1-D, got {b.ndim}-D")
        if b.shape[0] != w.shape[1]:
            raise LengthMismatch(
                f"bias has {b.shape[0]} entries for {w.shape[1]} classes"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NonFinite("head contains non-finite values")
        return SoftmaxHead(np.ascontiguousarray(w), np.ascontiguousarray(b))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def n_classes(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class CenterSet:
    centers: np.ndarray  # C x d
    shift: np.ndarray  # d
    residual: float  # max |W^T v - u|


@dataclass(frozen=True)
class ArgmaxReport:
    n_checked: int
    n_agree: int
    n_ambiguous: int

    def to_json_dict(self) -> dict:
        return {
            "n_checked": self.n_checked,
            "n_agree": self.n_agree,
            "n_ambiguous": self.n_ambiguous,
        }


@dataclass(frozen=True)
class ConfidenceReport:
    max_deviation: float
    n_points: int
    uniform_bias: bool

    def to_json_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "n_points": self.n_points,
            "uniform_bias": self.uniform_bias,
        }


def _signed_svd(w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD with each left singular vector's largest component positive."""
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    for k in range(s.shape[0]):
        j = int(np.argmax(np.abs(u[:, k])))
        if u[j, k] < 0:
            u[:, k] = -u[:, k]
            vt[k, :] = -vt[k, :]
    return u, s, vt


def compute_centers(
    head: SoftmaxHead,
    *,
    rank_tol: float = RANK_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> CenterSet:
    """Centers mu_c = W_c + v; requires rank(W) >= C."""
    w, b = head.weights, head.bias
    d, c = w.shape
    if d < c:
        raise RankDeficient(f"rank must be >= {c} classes, impossible with d={d}")
    with threadpool_limits(limits=1, user_api="blas"):
        u, s, vt = _signed_svd(w)
        if s[0] == 0.0 or s[-1] <= rank_tol * s[0]:
            raise RankDeficient(
                f"singular value ratio {0.0 if s[0] == 0.0 else s[-1] / s[0]:.3e} "
                f"below tolerance {rank_tol:.1e}"
            )
        targets = b - 0.5 * np.einsum("ij,ij->j", w, w)
        shift = u @ ((vt @ targets) / s)
        residual = float(np.abs(w.T @ shift - targets).max())
    if residual > residual_tol:
        raise NoSolution(
            f"center-shift residual {residual:.3e} exceeds {residual_tol:.1e}"
        )
    centers = np.ascontiguousarray(w.T + shift)
    return CenterSet(centers=centers, shift=shift, residual=residual)


def _as_points(points) -> np.ndarray:
    if isinstance(points, EmbeddingMatrix):
        return points.values
    return EmbeddingMatrix.from_array(points).values


def verify_argmax_equivalence(
    head: SoftmaxHead,
    centers: CenterSet,
    points,
    *,
    gap_tol: float = GAP_TOL,
) -> ArgmaxReport:
    """Compare softmax argmax with nearest-center argmin per point.

    Points whose top-two logit gap is below ``gap_tol`` are boundary-ambiguous:
    excluded from the comparison and counted separately.
    """
    x = _as_points(points)
    with threadpool_limits(limits=1, user_api="blas"):
        logits = x @ head.weights + head.bias
        # argmin_c ||x - mu_c||^2 = argmin_c (||mu_c||^2 - 2 x.mu_c); ||x||^2 drops.
        center_norms = np.einsum("ij,ij->i", centers.centers, centers.centers)
        neg_scores = center_norms[None, :] - 2.0 * (x @ centers.centers.T)
    if logits.shape[1] >= 2:
        part = np.partition(logits, logits.shape[1] - 2, axis=1)
        gaps = part[:, -1] - part[:, -2]
    else:
        gaps = np.full(x.shape[0], np.inf)
    ambiguous = gaps < gap_tol
    agree = np.argmax(logits, axis=1) == np.argmin(neg_scores, axis=1)
    checked = ~ambiguous
    return ArgmaxReport(
        n_checked=int(checked.sum()),
        n_agree=int(np.count_nonzero(agree & checked)),
        n_ambiguous=int(ambiguous.sum()),
    )


def _row_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def verify_confidence_equality(
    head: SoftmaxHead, centers: CenterSet, points
) -> ConfidenceReport:
    """Max |softmax(Wx+b) - softmax(-0.5*||x-mu||^2)| over points and classes."""
    x = _as_points(points)
    with threadpool_limits(limits=1, user_api="blas"):
        logits = x @ head.weights + head.bias
        center_norms = np.einsum("ij,ij->i", centers.centers, centers.centers)
        # -0.5*||x-mu_c||^2 up to the row-constant -0.5*||x||^2, which softmax drops.
        dist_scores = x @ centers.centers.T - 0.5 * center_norms[None, :]
    deviation = float(np.abs(_row_softmax(logits) - _row_softmax(dist_scores)).max())
    bias = head.bias
    return ConfidenceReport(
        max_deviation=deviation,
        n_points=x.shape[0],
        uniform_bias=bool(np.all(bias == bias[0])),
    )
