"""Seeded synthetic labeled embeddings and stratified subsampling.

Reproducibility contract: all randomness flows through the Philox 4x64
counter-based generator. Stream k=0 (spawn key) draws random class centers;
stream k=c+1 draws the points of class c, so changing per_class or the
center placement of one run never perturbs another class's draws and
fixtures are portable to any runtime with a Philox implementation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import InvalidSpec, OutOfRange


class SubsampleDeficitWarning(UserWarning):
    """A class had fewer samples than requested; all of them were kept."""


def _stream(seed: int, key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(key,))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class BlobSpec:
    """Isotropic Gaussian blobs: one cluster per class.

    ``centers`` may fix explicit class centers (n_classes x dim); otherwise
    centers are drawn uniformly from the ball of radius ``center_spread``.
    """

    n_classes: int
    per_class: int
    dim: int
    centers: np.ndarray | None = None
    center_spread: float = 10.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 1:
            raise InvalidSpec(f"n_classes must be >= 1, got {self.n_classes}")
        if self.per_class < 1:
            raise InvalidSpec(f"per_class must be >= 1, got {self.per_class}")
        if self.dim < 1:
            raise InvalidSpec(f"dim must be >= 1, got {self.dim}")
        if not self.sigma > 0:
            raise InvalidSpec(f"sigma must be > 0, got {self.sigma}")
        if self.center_spread < 0:
            raise InvalidSpec(f"center_spread must be >= 0, got {self.center_spread}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=np.float64)
            if centers.shape != (self.n_classes, self.dim):
                raise InvalidSpec(
                    f"centers shape {centers.shape} != ({self.n_classes}, {self.dim})"
                )
            if not np.isfinite(centers).all():
                raise InvalidSpec("centers contain non-finite values")
            object.__setattr__(self, "centers", centers)

    def to_json_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "per_class": self.per_class,
            "dim": self.dim,
            "centers": None if self.centers is None else self.centers.tolist(),
            "center_spread": self.center_spread,
            "sigma": self.sigma,
            "seed": int(self.seed),
        }


def _random_centers(spec: BlobSpec) -> np.ndarray:
    rng = _stream(spec.seed, 0)
    directions = rng.standard_normal((spec.n_classes, spec.dim))
    norms = np.sqrt(np.einsum("ij,ij->i", directions, directions))
    norms = np.where(norms == 0.0, 1.0, norms)
    radii = spec.center_spread * rng.random(spec.n_classes) ** (1.0 / spec.dim)
    return directions / norms[:, None] * radii[:, None]


def generate_blobs(spec: BlobSpec) -> LabeledDataset:
    """Deterministic blobs: rows grouped by class, labels 0..n_classes-1."""
    centers = spec.centers if spec.centers is not None else _random_centers(spec)
    features = np.empty((spec.n_classes * spec.per_class, spec.dim), dtype=np.float64)
    for c in range(spec.n_classes):
        block = slice(c * spec.per_class, (c + 1) * spec.per_class)
        noise = _stream(spec.seed, c + 1).standard_normal((spec.per_class, spec.dim))
        features[block] = centers[c] + spec.sigma * noise
    labels = np.repeat(np.arange(spec.n_classes, dtype=np.int64), spec.per_class)
    return LabeledDataset.from_arrays(features, labels)


def stratified_subsample(
    ds: LabeledDataset, per_class: int, seed: int
) -> LabeledDataset:
    """Uniform without-replacement sample of min(per_class, size) rows per class.

    Selected row indices are sorted ascending, so requesting at least every
    class's size returns the dataset in original row order. Classes short of
    ``per_class`` contribute everything and raise a SubsampleDeficitWarning.
    """
    if per_class < 1:
        raise OutOfRange(f"per_class must be >= 1, got {per_class}")
    if not 0 <= int(seed) < 2**64:
        raise OutOfRange(f"seed must be a 64-bit unsigned integer, got {seed}")
    chosen: list[np.ndarray] = []
    for c, rows in enumerate(ds.class_rows()):
        if rows.shape[0] <= per_class:
            if rows.shape[0] < per_class:
                warnings.warn(
                    f"class {int(ds.labels.classes[c])} has only {rows.shape[0]} "
                    f"samples, fewer than the requested {per_class}",
                    SubsampleDeficitWarning,
                    stacklevel=2,
                )
            chosen.append(rows)
        else:
            rng = _stream(seed, c + 1)
            chosen.append(rng.choice(rows, size=per_class, replace=False))
    return ds.subset(np.sort(np.concatenate(chosen)))
