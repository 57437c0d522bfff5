"""Skepxel images and the patch encoder of the co-learning branch.

A Skepxel is a 5 x 5 superpixel holding every joint of one frame, placed in the order
given by a joint permutation, with the three coordinates as colour channels. Images
stack orderings vertically and sampled frames horizontally.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .errors import SkeletonValidationError
from .logger import get_logger
from .models import SkeletonSequence

logger = get_logger("skepxel")

GRID = 5
GRID_JOINTS = GRID * GRID


def generate_orderings(m: int, seed: int, num_joints: int = GRID_JOINTS) -> List[np.ndarray]:
    """Canonical order followed by ``m - 1`` distinct seeded permutations."""
    if m < 1:
        raise ValueError(f"number of orderings must be at least 1, got {m}")
    rng = np.random.default_rng(seed)
    orderings = [np.arange(num_joints)]
    seen = {tuple(orderings[0])}
    while len(orderings) < m:
        perm = rng.permutation(num_joints)
        if tuple(perm) not in seen:
            seen.add(tuple(perm))
            orderings.append(perm)
    return orderings


def _check_ordering(ordering: np.ndarray) -> np.ndarray:
    ordering = np.asarray(ordering)
    if ordering.shape != (GRID_JOINTS,) or not np.array_equal(
        np.sort(ordering), np.arange(GRID_JOINTS)
    ):
        raise SkeletonValidationError(f"ordering must be a permutation of 0..{GRID_JOINTS - 1}")
    return ordering


def build_skepxel(frame: np.ndarray, ordering: np.ndarray) -> np.ndarray:
    """3 x 5 x 5 superpixel; joint at position p lands on pixel (p // 5, p % 5)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape != (3, GRID_JOINTS):
        raise SkeletonValidationError(f"frame must be 3 x {GRID_JOINTS}, got {frame.shape}")
    return frame[:, _check_ordering(ordering)].reshape(3, GRID, GRID)


def extract_skepxel(pixel: np.ndarray, ordering: np.ndarray) -> np.ndarray:
    """Inverse of ``build_skepxel``: the 3 x 25 joint coordinates."""
    frame = np.empty((3, GRID_JOINTS))
    frame[:, _check_ordering(ordering)] = np.asarray(pixel).reshape(3, GRID_JOINTS)
    return frame


def sample_frame_indices(num_frames: int, samples: int) -> np.ndarray:
    """``samples`` frame indices evenly spaced over ``num_frames`` frames."""
    if samples < 1:
        raise ValueError(f"number of sampled frames must be at least 1, got {samples}")
    return np.round(np.linspace(0, num_frames - 1, samples)).astype(int)


@dataclass(frozen=True, eq=False)
class SkepxelImage:
    """Float image of shape 3 x 5M x 5T'."""

    pixels: np.ndarray
    orderings: Tuple[Tuple[int, ...], ...]
    frame_indices: Tuple[int, ...]

    def __post_init__(self):
        _, height, width = self.pixels.shape
        if height != GRID * len(self.orderings) or width != GRID * len(self.frame_indices):
            raise SkeletonValidationError(
                f"image shape {self.pixels.shape} does not match "
                f"{len(self.orderings)} orderings x {len(self.frame_indices)} frames"
            )
        if not np.all(np.isfinite(self.pixels)):
            raise SkeletonValidationError("skepxel pixels must be finite")

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.pixels.shape

    def extract_frames(self, ordering_index: int = 0) -> np.ndarray:
        """Recover the 3 x T' x 25 sampled coordinates from one row of blocks."""
        ordering = np.array(self.orderings[ordering_index])
        row = self.pixels[:, GRID * ordering_index : GRID * (ordering_index + 1), :]
        samples = len(self.frame_indices)
        blocks = row.reshape(3, GRID, samples, GRID).transpose(0, 2, 1, 3)
        out = np.empty((3, samples, GRID_JOINTS))
        out[:, :, ordering] = blocks.reshape(3, samples, GRID_JOINTS)
        return out

    def to_uint8(self) -> np.ndarray:
        """Min-max scaled H x W x 3 bytes for visual inspection only."""
        lo, hi = self.pixels.min(), self.pixels.max()
        scaled = (self.pixels - lo) / (hi - lo) if hi > lo else np.zeros_like(self.pixels)
        return np.round(scaled * 255).astype(np.uint8).transpose(1, 2, 0)

    def save_png(self, path: Path) -> None:
        Image.fromarray(self.to_uint8()).save(path)

    def save_npy(self, path: Path) -> None:
        np.save(path, self.pixels)


def build_image(
    seq: SkeletonSequence | np.ndarray,
    m: int,
    frames: int,
    seed: int,
    orderings: Optional[Sequence[np.ndarray]] = None,
) -> SkepxelImage:
    """Tile Skepxels: block (m, t) holds sampled frame t under ordering m."""
    data = seq.data if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=np.float64)
    if data.shape[0] != 3 or data.shape[2] != GRID_JOINTS:
        raise SkeletonValidationError(
            f"skepxel images need 3 x T x {GRID_JOINTS} data, got {data.shape}"
        )
    if orderings is None:
        orderings = generate_orderings(m, seed)
    orderings = [_check_ordering(o) for o in orderings]
    indices = sample_frame_indices(data.shape[1], frames)

    sampled = data[:, indices, :]
    rows = []
    for ordering in orderings:
        blocks = sampled[:, :, ordering].reshape(3, len(indices), GRID, GRID)
        rows.append(blocks.transpose(0, 2, 1, 3).reshape(3, GRID, GRID * len(indices)))
    return SkepxelImage(
        pixels=np.concatenate(rows, axis=1),
        orderings=tuple(tuple(int(j) for j in o) for o in orderings),
        frame_indices=tuple(int(i) for i in indices),
    )


def patchify(images: np.ndarray, patch_size: int) -> np.ndarray:
    """N x 3 x H x W images to N x patches x 3P^2 rows, patches in row-major order."""
    N, C, H, W = images.shape
    if H % patch_size or W % patch_size:
        raise ValueError(f"patch size {patch_size} does not divide image {H} x {W}")
    nh, nw = H // patch_size, W // patch_size
    patches = images.reshape(N, C, nh, patch_size, nw, patch_size)
    return patches.transpose(0, 2, 4, 1, 3, 5).reshape(N, nh * nw, C * patch_size**2)


@dataclass(eq=False)
class PatchEncoder:
    """Linear patch projection, position embeddings, mean pooling and a linear output layer."""

    patch_size: int
    projection: np.ndarray
    position: np.ndarray
    mlp_weights: np.ndarray
    mlp_bias: np.ndarray

    @classmethod
    def initialize(
        cls,
        image_shape: Tuple[int, int, int],
        patch_size: int,
        embed_dim: int,
        out_dim: int,
        seed: int,
    ) -> "PatchEncoder":
        channels, height, width = image_shape
        if height % patch_size or width % patch_size:
            raise ValueError(f"patch size {patch_size} does not divide image {height} x {width}")
        n_patches = (height // patch_size) * (width // patch_size)
        patch_dim = channels * patch_size**2
        rng = np.random.default_rng(seed)
        return cls(
            patch_size=patch_size,
            projection=rng.uniform(-1, 1, (patch_dim, embed_dim)) / np.sqrt(patch_dim),
            position=rng.normal(0.0, 0.02, (n_patches, embed_dim)),
            mlp_weights=rng.uniform(-1, 1, (embed_dim, out_dim)) / np.sqrt(embed_dim),
            mlp_bias=np.zeros(out_dim),
        )

    def parameters(self) -> dict:
        return {
            "encoder.projection": self.projection,
            "encoder.position": self.position,
            "encoder.mlp_weights": self.mlp_weights,
            "encoder.mlp_bias": self.mlp_bias,
        }

    def forward(self, images: np.ndarray) -> Tuple[np.ndarray, dict]:
        images = np.asarray(images, dtype=np.float64)
        patches = patchify(images, self.patch_size)
        if patches.shape[1] != self.position.shape[0]:
            raise ValueError(
                f"image yields {patches.shape[1]} patches, encoder expects {self.position.shape[0]}"
            )
        tokens = patches @ self.projection + self.position
        pooled = tokens.mean(axis=1)
        out = pooled @ self.mlp_weights + self.mlp_bias
        return out, {"patches": patches, "pooled": pooled}

    def backward(self, dout: np.ndarray, cache: dict) -> dict:
        patches = cache["patches"]
        n_patches = patches.shape[1]
        # every token receives dpooled / n_patches
        dpooled = dout @ self.mlp_weights.T
        return {
            "encoder.projection": np.einsum("npi,nd->id", patches, dpooled) / n_patches,
            "encoder.position": np.tile(dpooled.sum(axis=0) / n_patches, (n_patches, 1)),
            "encoder.mlp_weights": cache["pooled"].T @ dout,
            "encoder.mlp_bias": dout.sum(axis=0),
        }


def encode_image(img: SkepxelImage | np.ndarray, enc: PatchEncoder) -> np.ndarray:
    """Embedding vector of one image."""
    pixels = img.pixels if isinstance(img, SkepxelImage) else np.asarray(img)
    out, _ = enc.forward(pixels[None])
    return out[0]


def distance_loss(gcn_embedding: np.ndarray, skepxel_embedding: np.ndarray) -> float:
    """Euclidean distance between the two embeddings."""
    a = np.asarray(gcn_embedding, dtype=np.float64)
    b = np.asarray(skepxel_embedding, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def batch_distance_loss(
    gcn_embeddings: np.ndarray, skepxel_embeddings: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Mean distance over a batch and its gradient with respect to the GCN embeddings."""
    diff = gcn_embeddings - skepxel_embeddings
    norms = np.linalg.norm(diff, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    grad = np.where(norms[:, None] > 0, diff / safe[:, None], 0.0) / len(norms)
    return float(norms.mean()), grad
