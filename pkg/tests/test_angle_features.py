"""Unit tests for the joint angle matrix and its embedding."""

import numpy as np
import pytest

from src.angle_features import (
    AngleMatrix,
    angle_embed_batch,
    angle_matrix,
    angle_pipeline,
    embed_angles,
    embed_array,
    normalize_over_frames,
)
from src.errors import SkeletonValidationError
from tests.helpers import random_sequence


class TestAngleMatrix:
    """Properties of the channel-averaged cosine matrix."""

    def test_symmetric_unit_diagonal_bounded(self, sequence):
        am = angle_matrix(normalize_over_frames(sequence.data))
        np.testing.assert_array_equal(am.values, am.values.T)
        np.testing.assert_allclose(np.diag(am.values), 1.0, atol=1e-9)
        assert np.all(np.abs(am.values) <= 1.0 + 1e-9)

    def test_invariant_to_positive_joint_scaling(self, sequence, rng):
        scales = rng.uniform(0.1, 10.0, size=(1, 1, 25))
        a = angle_matrix(normalize_over_frames(sequence.data))
        b = angle_matrix(normalize_over_frames(sequence.data * scales))
        np.testing.assert_allclose(a.values, b.values, atol=1e-9)

    def test_parallel_and_opposite_joints(self):
        data = np.zeros((3, 4, 25))
        trajectory = np.array([1.0, 2.0, 3.0, 4.0])
        data[:, :, 0] = trajectory
        data[:, :, 1] = 2 * trajectory
        data[:, :, 2] = -trajectory
        data[:, :, 3:] = 1.0
        am = angle_matrix(normalize_over_frames(data))
        assert am.values[0, 1] == pytest.approx(1.0)
        assert am.values[0, 2] == pytest.approx(-1.0)

    def test_zero_trajectory_gives_zero_row(self, sequence):
        data = np.array(sequence.data)
        data[:, :, 5] = 0.0
        am = angle_matrix(normalize_over_frames(data))
        np.testing.assert_array_equal(am.values[5], 0.0)

    def test_values_are_read_only(self, sequence):
        am = angle_matrix(normalize_over_frames(sequence.data))
        with pytest.raises(ValueError):
            am.values[0, 0] = 3.0

    def test_rejects_non_square(self):
        with pytest.raises(SkeletonValidationError, match="square"):
            AngleMatrix(np.zeros((3, 4)))

    def test_mean_off_diagonal(self):
        am = AngleMatrix(np.array([[1.0, 0.5], [0.5, 1.0]]))
        assert am.mean_off_diagonal() == pytest.approx(0.5)

    def test_to_csv(self, sequence, tmp_path, topo):
        path = tmp_path / "angles.csv"
        am = angle_matrix(normalize_over_frames(sequence.data))
        am.to_csv(path, topo.joint_names)
        lines = path.read_text().splitlines()
        assert lines[0].split(",")[1] == "SpineBase"
        assert len(lines) == 26


class TestEmbedding:
    """Multiplying the stream by the angle matrix over joints."""

    def test_identity_reproduces_input(self, sequence):
        out = embed_angles(sequence, AngleMatrix(np.eye(25)))
        np.testing.assert_array_equal(out.data, sequence.data)

    def test_pipeline_matches_manual(self, sequence):
        am = angle_matrix(normalize_over_frames(sequence.data))
        expected = np.einsum("ctj,jk->ctk", sequence.data, am.values)
        np.testing.assert_allclose(angle_pipeline(sequence).data, expected, atol=1e-12)

    def test_shape_mismatch(self, sequence):
        with pytest.raises(SkeletonValidationError, match="cannot embed"):
            embed_array(sequence.data, np.eye(10))

    def test_batch_matches_single(self, rng):
        seqs = [random_sequence(rng) for _ in range(3)]
        batch = np.stack([s.data for s in seqs])
        out = angle_embed_batch(batch)
        for i, seq in enumerate(seqs):
            np.testing.assert_allclose(out[i], angle_pipeline(seq).data, atol=1e-12)
