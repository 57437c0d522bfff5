"""Unit tests for Skepxel images and the patch encoder."""

import numpy as np
import pytest
from PIL import Image

from src.errors import SkeletonValidationError
from src.skepxel import (
    PatchEncoder,
    batch_distance_loss,
    build_image,
    build_skepxel,
    distance_loss,
    encode_image,
    extract_skepxel,
    generate_orderings,
    patchify,
    sample_frame_indices,
)


class TestOrderings:
    def test_first_is_canonical_and_all_distinct(self):
        orderings = generate_orderings(6, seed=1)
        np.testing.assert_array_equal(orderings[0], np.arange(25))
        assert len({tuple(o) for o in orderings}) == 6
        for o in orderings:
            np.testing.assert_array_equal(np.sort(o), np.arange(25))

    def test_seeded(self):
        a = generate_orderings(3, seed=7)
        b = generate_orderings(3, seed=7)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            generate_orderings(0, seed=0)


class TestSkepxel:
    """One frame as a 5 x 5 superpixel."""

    def test_extraction_is_lossless(self, rng):
        frame = rng.normal(size=(3, 25))
        for ordering in generate_orderings(4, seed=0):
            pixel = build_skepxel(frame, ordering)
            assert pixel.shape == (3, 5, 5)
            np.testing.assert_array_equal(extract_skepxel(pixel, ordering), frame)

    def test_canonical_placement(self):
        frame = np.tile(np.arange(25.0), (3, 1))
        pixel = build_skepxel(frame, np.arange(25))
        assert pixel[0, 2, 3] == 13.0

    def test_bad_ordering(self, rng):
        with pytest.raises(SkeletonValidationError, match="permutation"):
            build_skepxel(rng.normal(size=(3, 25)), np.zeros(25, dtype=int))

    def test_bad_frame_shape(self):
        with pytest.raises(SkeletonValidationError, match="3 x 25"):
            build_skepxel(np.zeros((3, 10)), np.arange(25))


class TestImage:
    """Orderings stacked vertically, frames horizontally."""

    def test_shape_and_recovery(self, sequence):
        image = build_image(sequence, m=3, frames=4, seed=0)
        assert image.shape == (3, 15, 20)
        indices = sample_frame_indices(sequence.num_frames, 4)
        assert image.frame_indices == tuple(int(i) for i in indices)
        for row in range(3):
            np.testing.assert_array_equal(
                image.extract_frames(row), sequence.data[:, indices, :]
            )

    def test_block_holds_frame_under_ordering(self, sequence):
        image = build_image(sequence, m=2, frames=3, seed=5)
        ordering = np.array(image.orderings[1])
        frame = sequence.data[:, image.frame_indices[2], :]
        block = image.pixels[:, 5:10, 10:15]
        np.testing.assert_array_equal(block, build_skepxel(frame, ordering))

    def test_sample_indices_cover_ends(self):
        np.testing.assert_array_equal(sample_frame_indices(10, 4), [0, 3, 6, 9])
        np.testing.assert_array_equal(sample_frame_indices(3, 5), [0, 0, 1, 2, 2])

    def test_upper_body_rejected(self, rng):
        with pytest.raises(SkeletonValidationError, match="3 x T x 25"):
            build_image(rng.normal(size=(3, 4, 10)), 1, 2, 0)

    def test_png_export(self, sequence, tmp_path):
        image = build_image(sequence, m=2, frames=4, seed=0)
        path = tmp_path / "img.png"
        image.save_png(path)
        with Image.open(path) as png:
            assert png.size == (20, 10)
            assert png.mode == "RGB"
        pixels = image.to_uint8()
        assert pixels.min() == 0 and pixels.max() == 255

    def test_npy_export_keeps_floats(self, sequence, tmp_path):
        image = build_image(sequence, m=1, frames=2, seed=0)
        path = tmp_path / "img.npy"
        image.save_npy(path)
        np.testing.assert_array_equal(np.load(path), image.pixels)


class TestPatchEncoder:
    def test_patchify_row_major(self):
        images = np.arange(2 * 3 * 10 * 10, dtype=float).reshape(2, 3, 10, 10)
        patches = patchify(images, 5)
        assert patches.shape == (2, 4, 75)
        np.testing.assert_array_equal(
            patches[0, 1].reshape(3, 5, 5), images[0, :, 0:5, 5:10]
        )

    def test_embedding_dimension_and_determinism(self, sequence):
        image = build_image(sequence, m=2, frames=4, seed=0)
        a = PatchEncoder.initialize(image.shape, 5, 8, 16, seed=3)
        b = PatchEncoder.initialize(image.shape, 5, 8, 16, seed=3)
        emb = encode_image(image, a)
        assert emb.shape == (16,)
        np.testing.assert_array_equal(emb, encode_image(image, b))

    def test_matches_explicit_patch_arithmetic(self, rng):
        image = rng.uniform(size=(3, 10, 15))
        enc = PatchEncoder.initialize(image.shape, 5, 6, 4, seed=2)
        enc.mlp_bias[:] = [0.1, -0.2, 0.3, 0.0]

        tokens = []
        for r in range(2):
            for c in range(3):
                patch = image[:, 5 * r : 5 * r + 5, 5 * c : 5 * c + 5].reshape(-1)
                tokens.append(patch @ enc.projection + enc.position[3 * r + c])
        expected = np.mean(tokens, axis=0) @ enc.mlp_weights + enc.mlp_bias
        np.testing.assert_allclose(encode_image(image, enc), expected, atol=1e-12)

    def test_patch_order_is_irrelevant_without_position(self, rng):
        image = rng.uniform(size=(3, 10, 10))
        enc = PatchEncoder.initialize(image.shape, 5, 6, 4, seed=2)
        enc.position[:] = 0.0
        swapped = image.copy()
        swapped[:, 0:5, 0:5], swapped[:, 5:10, 5:10] = image[:, 5:10, 5:10], image[:, 0:5, 0:5]
        swapped[:, 0:5, 5:10], swapped[:, 5:10, 0:5] = image[:, 5:10, 0:5], image[:, 0:5, 5:10]
        np.testing.assert_allclose(encode_image(swapped, enc), encode_image(image, enc), atol=1e-12)

    def test_indivisible_patch_size(self):
        with pytest.raises(ValueError, match="does not divide"):
            PatchEncoder.initialize((3, 10, 12), 5, 4, 4, seed=0)

    def test_backward_matches_finite_differences(self, sequence):
        image = build_image(sequence, m=1, frames=2, seed=0).pixels[None]
        enc = PatchEncoder.initialize(image.shape[1:], 5, 3, 2, seed=0)
        target = np.array([[0.3, -0.2]])

        def loss():
            out, _ = enc.forward(image)
            return 0.5 * float(np.sum((out - target) ** 2))

        out, cache = enc.forward(image)
        grads = enc.backward(out - target, cache)
        h = 1e-6
        for name, param in enc.parameters().items():
            idx = (0,) * param.ndim
            original = param[idx]
            param[idx] = original + h
            plus = loss()
            param[idx] = original - h
            minus = loss()
            param[idx] = original
            assert grads[name][idx] == pytest.approx((plus - minus) / (2 * h), rel=1e-5, abs=1e-8)


class TestDistanceLoss:
    def test_euclidean(self):
        assert distance_loss([0.0, 3.0], [4.0, 0.0]) == pytest.approx(5.0)

    def test_triangle_inequality(self, rng):
        for _ in range(50):
            a, b, c = rng.normal(size=(3, 8))
            assert distance_loss(a, c) <= distance_loss(a, b) + distance_loss(b, c) + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shapes differ"):
            distance_loss(np.zeros(3), np.zeros(4))

    def test_batch_gradient(self):
        a = np.array([[3.0, 4.0], [1.0, 1.0]])
        b = np.array([[0.0, 0.0], [1.0, 1.0]])
        loss, grad = batch_distance_loss(a, b)
        assert loss == pytest.approx(2.5)
        np.testing.assert_allclose(grad, [[0.3, 0.4], [0.0, 0.0]])
