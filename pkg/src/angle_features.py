"""Pairwise joint-angle matrix and its embedding into the skeleton stream."""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import SkeletonValidationError
from .models import SkeletonSequence

DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True, eq=False)
class AngleMatrix:
    """Symmetric J x J matrix of channel-averaged cosines between joint trajectories."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise SkeletonValidationError(
                f"angle matrix must be square, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def mean_off_diagonal(self) -> float:
        mask = ~np.eye(self.size, dtype=bool)
        return float(self.values[mask].mean())

    def to_csv(self, path: Path, joint_names: Optional[Sequence[str]] = None) -> None:
        """Write the matrix with a header row of joint names."""
        names = list(joint_names) if joint_names else [str(i) for i in range(self.size)]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["joint", *names])
            for name, row in zip(names, self.values):
                writer.writerow([name, *(repr(float(v)) for v in row)])


def normalize_over_frames(data: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Divide each (channel, joint) trajectory by its L2 norm over frames."""
    data = np.asarray(data, dtype=np.float64)
    norms = np.sqrt(np.sum(data**2, axis=1, keepdims=True))
    return data / np.maximum(norms, epsilon)


def angle_matrix(normalized: np.ndarray) -> AngleMatrix:
    """Mean over channels of the per-channel frame dot products between joints."""
    normalized = np.asarray(normalized, dtype=np.float64)
    channels = normalized.shape[0]
    values = np.einsum("ctj,ctk->jk", normalized, normalized) / channels
    upper = np.triu(values)
    values = upper + np.triu(values, 1).T
    return AngleMatrix(values)


def embed_angles(seq: SkeletonSequence, am: AngleMatrix) -> SkeletonSequence:
    """Multiply the stream by the angle matrix over the joint dimension."""
    return seq.with_data(embed_array(seq.data, am.values))


def embed_array(data: np.ndarray, values: np.ndarray) -> np.ndarray:
    if data.shape[-1] != values.shape[0]:
        raise SkeletonValidationError(
            f"angle matrix of size {values.shape[0]} cannot embed {data.shape[-1]} joints"
        )
    return data @ values


def angle_pipeline(
    seq: SkeletonSequence, epsilon: float = DEFAULT_EPSILON
) -> SkeletonSequence:
    """Embed a sequence with the angle matrix of its own normalized stream."""
    return embed_angles(seq, angle_matrix(normalize_over_frames(seq.data, epsilon)))


def angle_embed_batch(batch: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """``angle_pipeline`` over an N x C x T x J batch of raw arrays."""
    out = np.empty_like(batch, dtype=np.float64)
    for n, sample in enumerate(batch):
        am = angle_matrix(normalize_over_frames(sample, epsilon))
        out[n] = embed_array(sample, am.values)
    return out
