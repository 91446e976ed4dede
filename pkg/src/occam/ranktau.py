"""Rank-quality statistics between predicted scores and ground truth.

Kendall's tau uses exhaustive pair enumeration with sgn(0) = 0 (ties
contribute nothing) over the full M(M-1)/2 pair count. The weighted variant
up-weights pairs of top-ranked models with additive hyperbolic weights
1/(r_i+1) + 1/(r_j+1) on zero-based ranks, evaluated twice (ranks taken from
the ground-truth ordering, then from the predicted ordering) and averaged so
the statistic is symmetric in its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import KeyMismatch, TooFewModels


@dataclass(frozen=True)
class EvalReport:
    tau: float
    tau_w: float
    m: int
    n_ties_pred: int
    n_ties_gt: int

    def to_json_dict(self) -> dict:
        return {
            "tau": self.tau,
            "tau_w": self.tau_w,
            "m": self.m,
            "ties_pred": self.n_ties_pred,
            "ties_gt": self.n_ties_gt,
        }


def _aligned_values(
    pred: Mapping[str, float], gt: Mapping[str, float]
) -> tuple[list[str], np.ndarray, np.ndarray]:
    pred_keys = set(pred)
    gt_keys = set(gt)
    if pred_keys != gt_keys:
        missing = sorted(gt_keys - pred_keys)
        extra = sorted(pred_keys - gt_keys)
        raise KeyMismatch(
            f"model sets differ: missing from pred {missing}, not in gt {extra}"
        )
    if len(pred_keys) < 2:
        raise TooFewModels(f"need at least 2 models, got {len(pred_keys)}")
    keys = sorted(pred_keys)
    t = np.array([float(pred[k]) for k in keys])
    g = np.array([float(gt[k]) for k in keys])
    return keys, t, g


def _sign_pairs(values: np.ndarray) -> np.ndarray:
    """Upper-triangle matrix of sgn(v_i - v_j) as small exact integers."""
    return np.sign(values[:, None] - values[None, :]).astype(np.int64)


def _count_tied_pairs(values: np.ndarray) -> int:
    eq = values[:, None] == values[None, :]
    m = values.shape[0]
    return int((eq.sum() - m) // 2)


def kendall_tau(pred: Mapping[str, float], gt: Mapping[str, float]) -> float:
    """tau = (concordant - discordant) / (M(M-1)/2), ties contributing 0."""
    _, t, g = _aligned_values(pred, gt)
    m = t.shape[0]
    prod = _sign_pairs(g) * _sign_pairs(t)
    c_minus_d = int(np.triu(prod, 1).sum())
    return c_minus_d / (m * (m - 1) / 2.0)


def _ranks_descending(values: np.ndarray, keys: list[str]) -> np.ndarray:
    """Zero-based ranks by descending value; tied values ordered by key."""
    order = np.lexsort((np.array(keys), -values))
    ranks = np.empty(values.shape[0], dtype=np.int64)
    ranks[order] = np.arange(values.shape[0])
    return ranks


def _tau_w_pass(
    sign_g: np.ndarray, sign_t: np.ndarray, ranks: np.ndarray
) -> tuple[float, float]:
    inv = 1.0 / (ranks + 1.0)
    weights = inv[:, None] + inv[None, :]
    upper = np.triu_indices(ranks.shape[0], 1)
    num = float((weights[upper] * (sign_g * sign_t)[upper]).sum())
    den = float(weights[upper].sum())
    return num, den


def weighted_kendall_tau(pred: Mapping[str, float], gt: Mapping[str, float]) -> float:
    keys, t, g = _aligned_values(pred, gt)
    sign_g = _sign_pairs(g)
    sign_t = _sign_pairs(t)
    num_g, den_g = _tau_w_pass(sign_g, sign_t, _ranks_descending(g, keys))
    num_t, den_t = _tau_w_pass(sign_g, sign_t, _ranks_descending(t, keys))
    return 0.5 * (num_g / den_g + num_t / den_t)


def evaluate_ranking(
    pred: Mapping[str, float], gt: Mapping[str, float]
) -> EvalReport:
    _, t, g = _aligned_values(pred, gt)
    return EvalReport(
        tau=kendall_tau(pred, gt),
        tau_w=weighted_kendall_tau(pred, gt),
        m=t.shape[0],
        n_ties_pred=_count_tied_pairs(t),
        n_ties_gt=_count_tied_pairs(g),
    )
