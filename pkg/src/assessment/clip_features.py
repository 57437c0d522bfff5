"""Video-level features from concatenated clip embeddings."""

from dataclasses import dataclass

import numpy as np

from ..errors import ModelStateError
from ..logger import get_logger
from ..models import Dataset, SkeletonSequence
from ..network.model import GaitNet

logger = get_logger("assessment.clip_features")


@dataclass(frozen=True, eq=False)
class ClipFeatures:
    """Embeddings of the real clips and their zero-padded concatenation."""

    clips: np.ndarray
    vector: np.ndarray

    @property
    def num_clips(self) -> int:
        return self.clips.shape[0]


def split_clips(data: np.ndarray, clip_frames: int) -> np.ndarray:
    """K x C x clip_frames x J consecutive clips; the last clip repeats its own frames."""
    if clip_frames < 1:
        raise ValueError(f"clip_frames must be at least 1, got {clip_frames}")
    frames = data.shape[1]
    clips = []
    for start in range(0, frames, clip_frames):
        clip = data[:, start : start + clip_frames, :]
        if clip.shape[1] < clip_frames:
            clip = clip[:, np.arange(clip_frames) % clip.shape[1], :]
        clips.append(clip)
    return np.stack(clips)


def extract_clip_features(
    seq: SkeletonSequence | np.ndarray,
    net: GaitNet,
    clip_frames: int,
    n_clips: int = 4,
) -> ClipFeatures:
    """Embed each clip with the network and concatenate in temporal order."""
    if not net.trained:
        raise ModelStateError("clip features need a trained network")
    data = seq.data if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=np.float64)

    clips = split_clips(data, clip_frames)
    if len(clips) > n_clips:
        logger.debug(
            f"Keeping the first {n_clips} of {len(clips)} clips",
            extra={"clips": len(clips), "n_clips": n_clips},
        )
        clips = clips[:n_clips]

    _, embeddings, _ = net.forward(net.prepare(clips))
    vector = np.zeros(n_clips * net.embedding_dim)
    vector[: embeddings.size] = embeddings.ravel()
    return ClipFeatures(clips=embeddings, vector=vector)


def clip_feature_matrix(
    ds: Dataset, net: GaitNet, clip_frames: int, n_clips: int
) -> np.ndarray:
    """One video-level feature row per record."""
    if len(ds) == 0:
        return np.zeros((0, n_clips * net.embedding_dim))
    return np.stack(
        [extract_clip_features(seq, net, clip_frames, n_clips).vector for seq in ds]
    )
