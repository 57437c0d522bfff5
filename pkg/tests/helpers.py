"""Builders shared by the unit, integration and e2e tests."""

import numpy as np

from src.models import SkeletonSequence


def random_sequence(
    rng: np.random.Generator,
    frames: int = 12,
    joints: int = 25,
    subject_id: str = "s0",
    label=None,
    ados=None,
) -> SkeletonSequence:
    """Random walk skeleton, small enough for fast tests."""
    data = rng.normal(0.0, 0.3, size=(3, 1, joints)) + np.cumsum(
        rng.normal(0.0, 0.02, size=(3, frames, joints)), axis=1
    )
    return SkeletonSequence(data=data, subject_id=subject_id, label=label, ados=ados)


def static_sequence(pose: np.ndarray, frames: int = 8, **kwargs) -> SkeletonSequence:
    """A 3 x J pose held still for ``frames`` frames."""
    data = np.repeat(np.asarray(pose, dtype=np.float64)[:, None, :], frames, axis=1)
    return SkeletonSequence(data=data, subject_id=kwargs.pop("subject_id", "static"), **kwargs)
