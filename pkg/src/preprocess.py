"""Sequence normalization, upper-body completion and augmentation."""

import time
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .config import AugmentationConfig, PreprocessConfig, UpperBodyRatios
from .errors import PreprocessingError, SkeletonValidationError
from .logger import MetricsLogger, get_logger
from .models import AUGMENTED_PREFIX, Dataset, SkeletonSequence
from .topology import UPPER_BODY_JOINTS, SkeletonTopology, default_topology

logger = get_logger("preprocess")
metrics = MetricsLogger()


class AugmentationKind(str, Enum):
    """The seven augmentations applied to every original record."""

    JITTER = "jitter"
    SCALE = "scale"
    TRANSLATE_LEFT = "translate_left"
    TRANSLATE_RIGHT = "translate_right"
    FLIP_HORIZONTAL = "flip_horizontal"
    FLIP_VERTICAL = "flip_vertical"
    SLICE = "slice"


def _unit(v: np.ndarray, eps: float) -> Optional[np.ndarray]:
    norm = np.linalg.norm(v)
    if norm <= eps:
        return None
    return v / norm


def alignment_rotation(
    frame: np.ndarray, topo: SkeletonTopology, epsilon: float = 1e-8
) -> np.ndarray:
    """Rotation that puts the shoulder axis on x and the spine axis on z.

    ``frame`` is one 3 x J frame. The rows of the returned matrix are the body axes
    expressed in the input coordinates; the spine axis is orthogonalized against the
    shoulder axis.
    """
    left = topo.joint_names[topo.shoulder_left_index]
    right = topo.joint_names[topo.shoulder_right_index]
    x_axis = _unit(
        frame[:, topo.shoulder_right_index] - frame[:, topo.shoulder_left_index], epsilon
    )
    if x_axis is None:
        raise PreprocessingError(
            f"degenerate shoulder axis: {left} and {right} coincide in frame 0"
        )

    spine = topo.joint_names[topo.spine_index]
    top = topo.joint_names[topo.spine_top_index]
    spine_vec = frame[:, topo.spine_top_index] - frame[:, topo.spine_index]
    if np.linalg.norm(spine_vec) <= epsilon:
        raise PreprocessingError(
            f"degenerate spine axis: {spine} and {top} coincide in frame 0"
        )
    z_axis = _unit(spine_vec - np.dot(spine_vec, x_axis) * x_axis, epsilon)
    if z_axis is None:
        raise PreprocessingError(
            f"degenerate spine axis: {spine}->{top} is parallel to {left}->{right}"
        )
    y_axis = np.cross(z_axis, x_axis)
    return np.stack([x_axis, y_axis, z_axis])


def _centered(data: np.ndarray, topo: SkeletonTopology) -> np.ndarray:
    return data - data[:, :, topo.spine_index : topo.spine_index + 1]


def _require_full_body(seq: SkeletonSequence, topo: SkeletonTopology, op: str) -> None:
    if seq.num_joints != topo.num_joints:
        raise PreprocessingError(
            f"{op} needs {topo.num_joints} joints, {seq.subject_id!r} has {seq.num_joints}"
        )


def center_on_spine(
    seq: SkeletonSequence, topo: Optional[SkeletonTopology] = None
) -> SkeletonSequence:
    """Translate the spine joint to the origin in every frame."""
    topo = topo or default_topology()
    _require_full_body(seq, topo, "center_on_spine")
    return seq.with_data(_centered(seq.data, topo))


def view_invariant_transform(
    seq: SkeletonSequence,
    topo: Optional[SkeletonTopology] = None,
    epsilon: float = 1e-8,
) -> SkeletonSequence:
    """Rotate into the body frame of frame 0 and center the spine in every frame."""
    topo = topo or default_topology()
    _require_full_body(seq, topo, "view_invariant_transform")
    rotation = alignment_rotation(seq.data[:, 0, :], topo, epsilon)
    aligned = np.einsum("ij,jtk->itk", rotation, _centered(seq.data, topo))
    return seq.with_data(aligned)


def complete_upper_body(
    seq: SkeletonSequence,
    topo: Optional[SkeletonTopology] = None,
    ratios: Optional[UpperBodyRatios] = None,
    joint_names: Sequence[str] = UPPER_BODY_JOINTS,
    epsilon: float = 1e-8,
) -> SkeletonSequence:
    """Synthesize the 15 joints missing from a 10-joint upper-body recording.

    Lower-body joints are extrapolated from ``SpineShoulder`` along the body's downward
    axis (head to spine-shoulder, orthogonalized against the shoulder line) with
    offsets proportional to the shoulder breadth. Left and right joints are placed
    symmetrically about that axis.
    """
    topo = topo or default_topology()
    ratios = ratios or UpperBodyRatios()

    if len(joint_names) != seq.num_joints:
        raise PreprocessingError(
            f"{len(joint_names)} joint names given for {seq.num_joints} joints"
        )
    if seq.num_joints != len(UPPER_BODY_JOINTS):
        raise PreprocessingError(
            f"upper-body completion needs {len(UPPER_BODY_JOINTS)} joints, "
            f"got {seq.num_joints}"
        )
    unmapped = [name for name in joint_names if name not in UPPER_BODY_JOINTS]
    if unmapped or len(set(joint_names)) != len(joint_names):
        raise PreprocessingError(
            f"unmapped or repeated upper-body joint names: {unmapped or list(joint_names)}"
        )

    joints = {name: seq.data[:, :, i] for i, name in enumerate(joint_names)}
    head = joints["Head"]
    spine_shoulder = joints["SpineShoulder"]

    shoulder_vec = joints["ShoulderRight"] - joints["ShoulderLeft"]
    torso = np.linalg.norm(shoulder_vec, axis=0)
    if np.any(torso <= epsilon):
        frame = int(np.argmax(torso <= epsilon))
        raise PreprocessingError(
            f"zero torso length (ShoulderLeft/ShoulderRight coincide) in frame {frame}"
        )
    lateral = shoulder_vec / torso

    down = spine_shoulder - head
    down = down - np.sum(down * lateral, axis=0) * lateral
    down_norm = np.linalg.norm(down, axis=0)
    if np.any(down_norm <= epsilon):
        frame = int(np.argmax(down_norm <= epsilon))
        raise PreprocessingError(
            f"degenerate Head->SpineShoulder axis in frame {frame}"
        )
    down = down / down_norm
    forward = np.cross(lateral, down, axis=0)

    def below(drop: float, side: float = 0.0, ahead: float = 0.0) -> np.ndarray:
        return spine_shoulder + torso * (drop * down + side * lateral + ahead * forward)

    out = np.zeros((3, seq.num_frames, topo.num_joints))
    for name, coords in joints.items():
        out[:, :, topo.index(name)] = coords

    out[:, :, topo.index("Neck")] = (spine_shoulder + head) / 2
    out[:, :, topo.index("SpineMid")] = below(ratios.spine_mid_drop)
    out[:, :, topo.index("SpineBase")] = below(ratios.spine_base_drop)

    for side, sign in (("Left", -1.0), ("Right", 1.0)):
        width = sign * ratios.hip_half_width
        out[:, :, topo.index(f"Hip{side}")] = below(ratios.hip_drop, width)
        out[:, :, topo.index(f"Knee{side}")] = below(ratios.knee_drop, width)
        out[:, :, topo.index(f"Ankle{side}")] = below(ratios.ankle_drop, width)
        out[:, :, topo.index(f"Foot{side}")] = below(
            ratios.foot_drop, width, ratios.foot_forward
        )

        hand = joints[f"Hand{side}"]
        reach = hand - joints[f"Wrist{side}"]
        out[:, :, topo.index(f"HandTip{side}")] = hand + ratios.hand_tip_extension * reach
        out[:, :, topo.index(f"Thumb{side}")] = (
            hand
            + ratios.thumb_extension * reach
            + ratios.thumb_spread * torso * forward
        )

    logger.debug(
        f"Completed upper body of {seq.subject_id}",
        extra={"subject_id": seq.subject_id, "torso_length": float(np.mean(torso))},
    )
    return seq.with_data(out)


def inject_gaze_joint(
    seq: SkeletonSequence,
    gaze: np.ndarray,
    topo: Optional[SkeletonTopology] = None,
) -> SkeletonSequence:
    """Write a gaze trajectory into the head-gaze joint.

    Rows containing NaN are missing; they take the most recent preceding value and a
    missing start takes the first available value.
    """
    topo = topo or default_topology()
    _require_full_body(seq, topo, "inject_gaze_joint")
    gaze = np.asarray(gaze, dtype=np.float64)
    if gaze.shape != (seq.num_frames, 3):
        raise PreprocessingError(
            f"gaze must be shaped ({seq.num_frames}, 3), got {gaze.shape}"
        )

    present = ~np.isnan(gaze).any(axis=1)
    if not present.any():
        raise PreprocessingError(f"gaze of {seq.subject_id!r} is missing in every frame")

    # index of the latest present row at or before t; leading gap uses the first one
    last = np.where(present, np.arange(len(gaze)), -1)
    last = np.maximum.accumulate(last)
    last[last < 0] = int(np.argmax(present))
    filled = gaze[last]

    data = seq.data.copy()
    data[:, :, topo.head_gaze_index] = filled.T
    return seq.with_data(data)


def regularize_length(seq: SkeletonSequence, target_frames: int) -> SkeletonSequence:
    """Repeat frames cyclically from the start, or truncate, to ``target_frames``."""
    if target_frames < 1:
        raise PreprocessingError(f"target_frames must be at least 1, got {target_frames}")
    if seq.num_frames == target_frames:
        return seq
    idx = np.arange(target_frames) % seq.num_frames
    gaze = seq.gaze[idx] if seq.gaze is not None else None
    return seq.with_data(seq.data[:, idx, :], gaze=gaze)


def rescale(seq: SkeletonSequence, factor: float) -> SkeletonSequence:
    """Multiply every coordinate by ``factor``."""
    if factor <= 0:
        raise PreprocessingError(f"scale factor must be positive, got {factor}")
    return seq.with_data(seq.data * factor)


def augment(
    seq: SkeletonSequence,
    kind: AugmentationKind,
    seed: int,
    config: Optional[AugmentationConfig] = None,
    topo: Optional[SkeletonTopology] = None,
) -> SkeletonSequence:
    """One augmented copy of ``seq``; deterministic for a given seed."""
    kind = AugmentationKind(kind)
    config = config or AugmentationConfig()
    topo = topo or default_topology()
    rng = np.random.default_rng(seed)

    data = np.array(seq.data)
    gaze = None if seq.gaze is None else np.array(seq.gaze)

    if kind is AugmentationKind.JITTER:
        data = data + rng.normal(0.0, config.jitter_sigma, size=data.shape)
    elif kind is AugmentationKind.SCALE:
        factor = rng.uniform(config.scale_min, config.scale_max)
        data = data * factor
        if gaze is not None:
            gaze = gaze * factor
    elif kind is AugmentationKind.TRANSLATE_LEFT:
        data[0] -= config.translation
        if gaze is not None:
            gaze[:, 0] -= config.translation
    elif kind is AugmentationKind.TRANSLATE_RIGHT:
        data[0] += config.translation
        if gaze is not None:
            gaze[:, 0] += config.translation
    elif kind is AugmentationKind.FLIP_HORIZONTAL:
        if seq.num_joints != topo.num_joints:
            raise PreprocessingError("flip_horizontal needs the full-body topology")
        data[0] = -data[0]
        data = data[:, :, topo.mirror_permutation()]
        if gaze is not None:
            gaze[:, 0] = -gaze[:, 0]
    elif kind is AugmentationKind.FLIP_VERTICAL:
        data[1] = -data[1]
        if gaze is not None:
            gaze[:, 1] = -gaze[:, 1]
    elif kind is AugmentationKind.SLICE:
        frames = seq.num_frames
        length = max(1, int(round(config.slice_ratio * frames)))
        start = int(rng.integers(0, frames - length + 1))
        idx = start + np.arange(frames) % length
        data = data[:, idx, :]
        if gaze is not None:
            gaze = gaze[idx]

    try:
        return seq.with_data(
            data, gaze=gaze, provenance=f"{AUGMENTED_PREFIX}{kind.value}"
        )
    except SkeletonValidationError as e:
        raise PreprocessingError(f"augmentation {kind.value} failed: {e}") from e


def augment_dataset(
    ds: Dataset, seed: int, config: Optional[AugmentationConfig] = None
) -> Dataset:
    """Every original record followed by its seven augmented variants."""
    start = time.time()
    sequences = []
    for record_idx, seq in enumerate(ds.originals()):
        sequences.append(seq)
        for kind_idx, kind in enumerate(AugmentationKind):
            variant_seed = int(
                np.random.SeedSequence([seed, record_idx, kind_idx]).generate_state(1)[0]
            )
            sequences.append(augment(seq, kind, variant_seed, config, ds.topology))

    result = Dataset(tuple(sequences), ds.topology, ds.preprocessed)
    metrics.log_stage(
        "augment", time.time() - start, originals=len(ds.originals()), records=len(result)
    )
    return result


def preprocess_sequence(
    seq: SkeletonSequence,
    config: Optional[PreprocessConfig] = None,
    topo: Optional[SkeletonTopology] = None,
) -> SkeletonSequence:
    """Completion, gaze injection, spatial normalization and length regularization.

    Gaze is recorded in the same world frame as the joints, so it is written into
    the head-gaze joint before centering and rotation move the body.
    """
    config = config or PreprocessConfig()
    topo = topo or default_topology()

    if seq.needs_completion:
        seq = complete_upper_body(
            seq, topo, config.upper_body, epsilon=config.epsilon
        )
    if config.gaze_as_joint and seq.gaze is not None:
        seq = inject_gaze_joint(seq, seq.gaze, topo)
    if config.apply_rotation:
        seq = view_invariant_transform(seq, topo, config.epsilon)
    else:
        seq = center_on_spine(seq, topo)
    return regularize_length(seq, config.target_frames)


def preprocess_dataset(
    ds: Dataset, config: Optional[PreprocessConfig] = None
) -> Dataset:
    """Preprocess every record of a dataset, once.

    A dataset flagged as preprocessed is returned unchanged, so augmented copies
    written by an earlier run keep their translations and flips.
    """
    if ds.preprocessed:
        logger.info(f"Dataset of {len(ds)} records is already preprocessed; skipping")
        return ds
    config = config or PreprocessConfig()
    start = time.time()

    sequences = []
    for i, seq in enumerate(ds.sequences):
        try:
            sequences.append(preprocess_sequence(seq, config, ds.topology))
        except PreprocessingError as e:
            raise PreprocessingError(f"record {i} ({seq.subject_id}): {e}") from e

    result = Dataset(tuple(sequences), ds.topology, preprocessed=True)
    result.validate()
    metrics.log_stage(
        "preprocess",
        time.time() - start,
        records=len(result),
        completed=sum(seq.needs_completion for seq in ds.sequences),
        rotation=config.apply_rotation,
    )
    return result
