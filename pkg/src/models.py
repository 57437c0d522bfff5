"""Data models for gaitscope."""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np

from .errors import SkeletonValidationError
from .topology import SkeletonTopology, default_topology

Label = Literal["TD", "ASD"]
LABELS: Tuple[str, ...] = ("TD", "ASD")

ORIGINAL = "original"
AUGMENTED_PREFIX = "augmented:"

COORDINATE_CHANNELS = 3
FULL_BODY_JOINTS = 25
UPPER_BODY_JOINT_COUNT = 10


@dataclass(frozen=True)
class AdosRecord:
    """Clinician ADOS assessment attached to a subject."""

    score: int
    module_id: int
    age_years: int

    def __post_init__(self):
        for name in ("score", "module_id", "age_years"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise SkeletonValidationError(
                    f"{name} must be an integer, got {value!r}"
                )
        if self.score < 0:
            raise SkeletonValidationError(
                f"score must be non-negative, got {self.score}"
            )
        if self.age_years < 3:
            raise SkeletonValidationError(
                f"age_years must be at least 3, got {self.age_years}"
            )


@dataclass(frozen=True, eq=False)
class SkeletonSequence:
    """Joint coordinates of one recording, shaped channels x frames x joints."""

    data: np.ndarray
    subject_id: str
    frame_rate: Optional[float] = None
    label: Optional[Label] = None
    ados: Optional[AdosRecord] = None
    provenance: str = ORIGINAL
    gaze: Optional[np.ndarray] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise SkeletonValidationError(
                f"data must be a C x T x J tensor, got shape {data.shape}"
            )
        channels, frames, joints = data.shape
        if channels != COORDINATE_CHANNELS:
            raise SkeletonValidationError(
                f"data must have {COORDINATE_CHANNELS} coordinate channels, got {channels}"
            )
        if frames < 1:
            raise SkeletonValidationError("data must contain at least one frame")
        if joints not in (UPPER_BODY_JOINT_COUNT, FULL_BODY_JOINTS):
            raise SkeletonValidationError(
                f"joint count must be {UPPER_BODY_JOINT_COUNT} or {FULL_BODY_JOINTS}, got {joints}"
            )
        if not np.all(np.isfinite(data)):
            bad = np.argwhere(~np.isfinite(data))[0]
            raise SkeletonValidationError(
                f"non-finite coordinate in {self.subject_id!r} at "
                f"channel {bad[0]}, frame {bad[1]}, joint {bad[2]}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

        if not isinstance(self.subject_id, str) or not self.subject_id.strip():
            raise SkeletonValidationError(
                f"subject_id must be a non-empty string, got {self.subject_id!r}"
            )
        if self.label is not None and self.label not in LABELS:
            raise SkeletonValidationError(
                f"label must be one of {LABELS} or None, got {self.label!r}"
            )
        if self.frame_rate is not None and not self.frame_rate > 0:
            raise SkeletonValidationError(
                f"frame_rate must be positive, got {self.frame_rate}"
            )
        if self.provenance != ORIGINAL and not (
            self.provenance.startswith(AUGMENTED_PREFIX)
            and len(self.provenance) > len(AUGMENTED_PREFIX)
        ):
            raise SkeletonValidationError(
                f"provenance must be 'original' or 'augmented:<kind>', got {self.provenance!r}"
            )

        if self.gaze is not None:
            gaze = np.array(self.gaze, dtype=np.float64)
            if gaze.shape != (frames, 3):
                raise SkeletonValidationError(
                    f"gaze must be shaped ({frames}, 3), got {gaze.shape}"
                )
            gaze.setflags(write=False)
            object.__setattr__(self, "gaze", gaze)

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def num_joints(self) -> int:
        return self.data.shape[2]

    @property
    def is_augmented(self) -> bool:
        return self.provenance != ORIGINAL

    @property
    def augmentation_kind(self) -> Optional[str]:
        if not self.is_augmented:
            return None
        return self.provenance[len(AUGMENTED_PREFIX) :]

    @property
    def needs_completion(self) -> bool:
        return self.num_joints == UPPER_BODY_JOINT_COUNT

    def with_data(self, data: np.ndarray, **changes) -> "SkeletonSequence":
        """Copy of this sequence with new coordinates and optional metadata changes."""
        return replace(self, data=data, **changes)


@dataclass(frozen=True)
class Dataset:
    """A collection of sequences on a shared topology.

    ``preprocessed`` marks records that already went through spatial normalization;
    preprocessing such a dataset again is a no-op.
    """

    sequences: Tuple[SkeletonSequence, ...] = ()
    topology: SkeletonTopology = field(default_factory=default_topology)
    preprocessed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    @property
    def needs_completion(self) -> bool:
        """True when any record holds a 10-joint upper body."""
        return any(seq.needs_completion for seq in self.sequences)

    def subjects(self) -> List[str]:
        """Distinct subject ids in sorted order."""
        return sorted({seq.subject_id for seq in self.sequences})

    def originals(self) -> "Dataset":
        return Dataset(
            tuple(seq for seq in self.sequences if not seq.is_augmented),
            self.topology,
            self.preprocessed,
        )

    def select_subjects(self, subject_ids: Iterable[str]) -> "Dataset":
        """All records (original and augmented) of the given subjects."""
        wanted = set(subject_ids)
        return Dataset(
            tuple(seq for seq in self.sequences if seq.subject_id in wanted),
            self.topology,
            self.preprocessed,
        )

    def records_per_subject(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for seq in self.sequences:
            counts[seq.subject_id] = counts.get(seq.subject_id, 0) + 1
        return counts

    def validate(self) -> None:
        """Check the dataset-level invariants of a preprocessed dataset."""
        for i, seq in enumerate(self.sequences):
            if seq.num_joints != self.topology.num_joints:
                raise SkeletonValidationError(
                    f"record {i} ({seq.subject_id}) has {seq.num_joints} joints, "
                    f"topology has {self.topology.num_joints}"
                )
        original_subjects = {s.subject_id for s in self.sequences if not s.is_augmented}
        for i, seq in enumerate(self.sequences):
            if seq.is_augmented and seq.subject_id not in original_subjects:
                raise SkeletonValidationError(
                    f"augmented record {i} has no original for subject {seq.subject_id!r}"
                )
