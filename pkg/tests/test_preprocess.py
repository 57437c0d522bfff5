"""Unit tests for preprocessing and augmentation."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.assessment.synth import base_pose
from src.config import AugmentationConfig, PreprocessConfig
from src.errors import PreprocessingError
from src.models import Dataset, SkeletonSequence
from src.preprocess import (
    AugmentationKind,
    alignment_rotation,
    augment,
    augment_dataset,
    center_on_spine,
    complete_upper_body,
    inject_gaze_joint,
    preprocess_dataset,
    preprocess_sequence,
    regularize_length,
    rescale,
    view_invariant_transform,
)
from src.topology import UPPER_BODY_JOINTS, default_topology
from tests.helpers import random_sequence, static_sequence


def upper_body_sequence(frames: int = 4) -> SkeletonSequence:
    """A 10-joint upper body cut out of the standing pose."""
    pose = base_pose()
    topo = default_topology()
    idx = [topo.index(name) for name in UPPER_BODY_JOINTS]
    return static_sequence(pose[:, idx], frames=frames, subject_id="upper")


class TestSpatialNormalization:
    """Centering and view-invariant rotation."""

    def test_center_on_spine(self, sequence, topo):
        centered = center_on_spine(sequence, topo)
        np.testing.assert_allclose(centered.data[:, :, topo.spine_index], 0.0, atol=1e-12)

    def test_alignment_of_rotated_pose(self, topo):
        pose = base_pose()
        rotation = Rotation.from_euler("zyx", [40, 10, -25], degrees=True).as_matrix()
        rotated = static_sequence(rotation @ pose + np.array([[1.0], [2.0], [0.5]]))

        aligned = view_invariant_transform(rotated, topo)
        frame = aligned.data[:, 0, :]
        shoulder = frame[:, topo.shoulder_right_index] - frame[:, topo.shoulder_left_index]
        spine = frame[:, topo.spine_top_index] - frame[:, topo.spine_index]
        assert shoulder[1] == pytest.approx(0.0, abs=1e-9)
        assert shoulder[2] == pytest.approx(0.0, abs=1e-9)
        assert shoulder[0] > 0
        assert spine[0] == pytest.approx(0.0, abs=1e-9)
        assert spine[2] > 0
        np.testing.assert_allclose(frame[:, topo.spine_index], 0.0, atol=1e-12)
        # rigid motion removed: the aligned pose matches the original up to centering
        expected = pose - pose[:, [topo.spine_index]]
        np.testing.assert_allclose(frame, expected, atol=1e-9)

    def test_alignment_is_idempotent(self, sequence, topo):
        once = view_invariant_transform(sequence, topo)
        twice = view_invariant_transform(once, topo)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-9)

    def test_alignment_ignores_rigid_motion_of_moving_sequence(self, sequence, topo):
        rotation = Rotation.from_euler("zyx", [75, -20, 10], degrees=True).as_matrix()
        offset = np.array([0.7, -2.0, 1.1])[:, None, None]
        moved = sequence.with_data(np.einsum("ij,jtk->itk", rotation, sequence.data) + offset)
        np.testing.assert_allclose(
            view_invariant_transform(moved, topo).data,
            view_invariant_transform(sequence, topo).data,
            atol=1e-9,
        )

    def test_rotation_matrix_is_orthonormal(self, sequence, topo):
        R = alignment_rotation(sequence.data[:, 0, :], topo)
        np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0)

    def test_degenerate_shoulders(self, topo):
        pose = base_pose()
        pose[:, topo.shoulder_right_index] = pose[:, topo.shoulder_left_index]
        with pytest.raises(PreprocessingError, match="shoulder"):
            view_invariant_transform(static_sequence(pose), topo)

    def test_spine_parallel_to_shoulders(self, topo):
        pose = base_pose()
        pose[:, topo.spine_top_index] = pose[:, topo.spine_index] + np.array([0.3, 0, 0])
        with pytest.raises(PreprocessingError, match="parallel"):
            view_invariant_transform(static_sequence(pose), topo)


class TestUpperBodyCompletion:
    """Filling in 15 joints from 10."""

    def test_output_has_25_joints_and_keeps_measured(self, topo):
        seq = upper_body_sequence()
        full = complete_upper_body(seq, topo)
        assert full.num_joints == 25
        for i, name in enumerate(UPPER_BODY_JOINTS):
            np.testing.assert_array_equal(full.data[:, :, topo.index(name)], seq.data[:, :, i])

    def test_lower_body_below_and_symmetric(self, topo):
        full = complete_upper_body(upper_body_sequence(), topo).data[:, 0, :]
        top = full[:, topo.index("SpineShoulder")]
        for name in ("SpineMid", "SpineBase", "HipLeft", "KneeLeft", "AnkleLeft"):
            assert full[2, topo.index(name)] < top[2]
        for suffix in ("Hip", "Knee", "Ankle", "Foot"):
            left = full[:, topo.index(f"{suffix}Left")]
            right = full[:, topo.index(f"{suffix}Right")]
            assert left[0] - top[0] == pytest.approx(-(right[0] - top[0]), abs=1e-9)
            assert left[2] == pytest.approx(right[2], abs=1e-9)

    def test_wrong_name_count(self, topo):
        with pytest.raises(PreprocessingError, match="joint names"):
            complete_upper_body(upper_body_sequence(), topo, joint_names=UPPER_BODY_JOINTS[:9])

    def test_full_body_input_rejected(self, sequence, topo):
        with pytest.raises(PreprocessingError):
            complete_upper_body(sequence, topo, joint_names=tuple(topo.joint_names))

    def test_zero_torso(self, topo):
        seq = upper_body_sequence()
        data = np.array(seq.data)
        data[:, :, 3] = data[:, :, 2]
        with pytest.raises(PreprocessingError, match="torso"):
            complete_upper_body(seq.with_data(data), topo)


class TestGazeInjection:
    def test_forward_fill(self, sequence, topo):
        gaze = np.arange(36, dtype=float).reshape(12, 3)
        gaze[[0, 5, 6]] = np.nan
        out = inject_gaze_joint(sequence, gaze, topo)
        written = out.data[:, :, topo.head_gaze_index].T
        np.testing.assert_array_equal(written[0], gaze[1])
        np.testing.assert_array_equal(written[5], gaze[4])
        np.testing.assert_array_equal(written[6], gaze[4])
        np.testing.assert_array_equal(written[7], gaze[7])

    def test_all_missing(self, sequence, topo):
        with pytest.raises(PreprocessingError, match="every frame"):
            inject_gaze_joint(sequence, np.full((12, 3), np.nan), topo)


class TestLengthAndScale:
    def test_cyclic_repeat(self, rng):
        seq = random_sequence(rng, frames=5)
        out = regularize_length(seq, 12)
        assert out.num_frames == 12
        np.testing.assert_array_equal(out.data[:, 7], seq.data[:, 2])

    def test_truncate(self, sequence):
        out = regularize_length(sequence, 4)
        np.testing.assert_array_equal(out.data, sequence.data[:, :4])

    def test_same_length_is_identity(self, sequence):
        assert regularize_length(sequence, sequence.num_frames) is sequence

    def test_rescale(self, sequence):
        np.testing.assert_allclose(rescale(sequence, 2.0).data, sequence.data * 2.0)
        with pytest.raises(PreprocessingError):
            rescale(sequence, 0.0)


class TestAugmentation:
    """Seven seeded augmentations."""

    @pytest.mark.parametrize("kind", list(AugmentationKind))
    def test_deterministic_and_labelled(self, sequence, kind):
        a = augment(sequence, kind, seed=11)
        b = augment(sequence, kind, seed=11)
        np.testing.assert_array_equal(a.data, b.data)
        assert a.provenance == f"augmented:{kind.value}"
        assert a.data.shape == sequence.data.shape

    def test_translations(self, sequence):
        config = AugmentationConfig(translation=0.25)
        left = augment(sequence, AugmentationKind.TRANSLATE_LEFT, 0, config)
        right = augment(sequence, AugmentationKind.TRANSLATE_RIGHT, 0, config)
        np.testing.assert_allclose(left.data[0], sequence.data[0] - 0.25)
        np.testing.assert_allclose(right.data[0], sequence.data[0] + 0.25)
        np.testing.assert_array_equal(left.data[1:], sequence.data[1:])

    def test_translation_and_scale_move_gaze(self, sequence, rng):
        seq = sequence.with_data(sequence.data, gaze=rng.normal(size=(12, 3)))
        config = AugmentationConfig(translation=0.25, scale_min=2.0, scale_max=2.0)
        left = augment(seq, AugmentationKind.TRANSLATE_LEFT, 0, config)
        scaled = augment(seq, AugmentationKind.SCALE, 0, config)
        np.testing.assert_allclose(left.gaze[:, 0], seq.gaze[:, 0] - 0.25)
        np.testing.assert_allclose(scaled.gaze, 2.0 * seq.gaze)

    def test_horizontal_flip_mirrors_joints(self, sequence, topo):
        flipped = augment(sequence, AugmentationKind.FLIP_HORIZONTAL, 0)
        left, right = topo.index("HandLeft"), topo.index("HandRight")
        np.testing.assert_allclose(flipped.data[0, :, left], -sequence.data[0, :, right])
        np.testing.assert_allclose(flipped.data[1:, :, left], sequence.data[1:, :, right])

    def test_horizontal_flip_twice_is_identity(self, sequence):
        once = augment(sequence, AugmentationKind.FLIP_HORIZONTAL, 0)
        twice = augment(once, AugmentationKind.FLIP_HORIZONTAL, 0)
        np.testing.assert_array_equal(twice.data, sequence.data)

    def test_vertical_flip(self, sequence):
        flipped = augment(sequence, AugmentationKind.FLIP_VERTICAL, 0)
        np.testing.assert_allclose(flipped.data[1], -sequence.data[1])

    def test_slice_repeats_a_window(self, sequence):
        config = AugmentationConfig(slice_ratio=0.5)
        out = augment(sequence, AugmentationKind.SLICE, 4, config)
        np.testing.assert_array_equal(out.data[:, :6], out.data[:, 6:])

    def test_scale_within_bounds(self, sequence):
        config = AugmentationConfig(scale_min=0.8, scale_max=0.9)
        out = augment(sequence, AugmentationKind.SCALE, 2, config)
        ratio = out.data[np.abs(sequence.data) > 1e-6] / sequence.data[np.abs(sequence.data) > 1e-6]
        assert np.allclose(ratio, ratio[0])
        assert 0.8 <= ratio[0] <= 0.9

    def test_augment_dataset_layout(self, labeled_dataset):
        expanded = augment_dataset(labeled_dataset, seed=0)
        assert len(expanded) == 8 * len(labeled_dataset)
        for i, seq in enumerate(expanded):
            assert seq.is_augmented == (i % 8 != 0)
            assert seq.subject_id == expanded.sequences[i - i % 8].subject_id
            assert seq.label == expanded.sequences[i - i % 8].label
        expanded.validate()

    def test_augment_dataset_deterministic(self, labeled_dataset):
        a = augment_dataset(labeled_dataset, seed=5)
        b = augment_dataset(labeled_dataset, seed=5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.data, y.data)


class TestPipeline:
    def test_preprocess_sequence_defaults(self, rng, topo):
        seq = random_sequence(rng, frames=20)
        out = preprocess_sequence(seq, PreprocessConfig(target_frames=32), topo)
        assert out.num_frames == 32
        np.testing.assert_allclose(out.data[:, :, topo.spine_index], 0.0, atol=1e-12)

    def test_preprocess_completes_upper_bodies(self):
        ds = Dataset((upper_body_sequence(frames=6),))
        out = preprocess_dataset(ds, PreprocessConfig(target_frames=8))
        assert out.sequences[0].num_joints == 25
        assert out.sequences[0].num_frames == 8

    def test_error_names_record(self, topo):
        pose = base_pose()
        pose[:, topo.shoulder_right_index] = pose[:, topo.shoulder_left_index]
        ds = Dataset((static_sequence(pose, subject_id="bad"),))
        with pytest.raises(PreprocessingError, match=r"record 0 \(bad\)"):
            preprocess_dataset(ds, PreprocessConfig(apply_rotation=True))

    def test_gaze_follows_body_through_alignment(self, topo):
        pose = base_pose()
        rotation = Rotation.from_euler("zyx", [-30, 5, 15], degrees=True).as_matrix()
        offset = np.array([0.4, -1.5, 0.2])
        # a point half a meter in front of the head, in the body frame
        target = pose[:, topo.index("Head")] + np.array([0.0, 0.5, 0.0])
        world = static_sequence(rotation @ pose + offset[:, None], frames=6)
        gaze = np.tile(rotation @ target + offset, (6, 1))
        seq = world.with_data(world.data, gaze=gaze)

        config = PreprocessConfig(apply_rotation=True, gaze_as_joint=True, target_frames=6)
        out = preprocess_sequence(seq, config, topo)
        expected = target - pose[:, topo.spine_index]
        np.testing.assert_allclose(
            out.data[:, :, topo.head_gaze_index], np.tile(expected[:, None], (1, 6)), atol=1e-9
        )

    def test_gaze_is_centered_with_the_body(self, topo):
        pose = base_pose()
        world = static_sequence(pose + np.array([[2.0], [3.0], [0.0]]), frames=4)
        gaze = np.tile([2.0, 4.0, 1.5], (4, 1))
        seq = world.with_data(world.data, gaze=gaze)
        out = preprocess_sequence(seq, PreprocessConfig(gaze_as_joint=True, target_frames=4), topo)
        spine = pose[:, topo.spine_index] + np.array([2.0, 3.0, 0.0])
        np.testing.assert_allclose(out.data[:, 0, topo.head_gaze_index], gaze[0] - spine)


class TestPreprocessedFlag:
    """Preprocessing runs once per dataset."""

    def test_augmented_translations_survive_a_second_pass(self, labeled_dataset):
        config = PreprocessConfig(target_frames=12)
        prepared = preprocess_dataset(labeled_dataset, config)
        assert prepared.preprocessed and not labeled_dataset.preprocessed

        augmented = augment_dataset(prepared, seed=0, config=AugmentationConfig(translation=0.25))
        assert augmented.preprocessed
        again = preprocess_dataset(augmented, config)
        assert again is augmented

        records = {seq.provenance: seq for seq in again.sequences[:8]}
        original = records["original"]
        left = records["augmented:translate_left"]
        right = records["augmented:translate_right"]
        np.testing.assert_allclose(left.data[0], original.data[0] - 0.25)
        np.testing.assert_allclose(right.data[0], original.data[0] + 0.25)
        assert not np.allclose(left.data, right.data)

    def test_unflagged_second_pass_erases_translations(self, labeled_dataset):
        config = PreprocessConfig(target_frames=12)
        augmented = augment_dataset(preprocess_dataset(labeled_dataset, config), seed=0)
        recentered = preprocess_dataset(replace(augmented, preprocessed=False), config)
        original, left = recentered.sequences[0], recentered.sequences[3]
        assert left.provenance == "augmented:translate_left"
        np.testing.assert_allclose(left.data, original.data, atol=1e-12)

    def test_subsets_keep_the_flag(self, labeled_dataset):
        prepared = preprocess_dataset(labeled_dataset, PreprocessConfig(target_frames=12))
        assert prepared.originals().preprocessed
        assert prepared.select_subjects(["subj_00"]).preprocessed
