"""Skeleton adjacency matrices and their multi-scale normalized form."""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from ..topology import SkeletonTopology, default_topology


def adjacency_from_edges(edges: Iterable[Tuple[int, int]], num_nodes: int) -> np.ndarray:
    """Binary symmetric adjacency matrix with a zero diagonal."""
    A = np.zeros((num_nodes, num_nodes))
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) is not a bone")
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def build_adjacency(topo: Optional[SkeletonTopology] = None) -> np.ndarray:
    """Bone adjacency of a topology."""
    topo = topo or default_topology()
    return adjacency_from_edges(topo.edges, topo.num_joints)


def k_adjacency(A: np.ndarray, k: int) -> np.ndarray:
    """Self-loops plus the indicator of joint pairs exactly ``k`` hops apart.

    Computed as ``I + 1(Ã^k >= 1) - 1(Ã^(k-1) >= 1)`` with ``Ã = A + I``.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    identity = np.eye(n)
    A_tilde = np.minimum(A + identity, 1.0)

    previous = identity
    reach = A_tilde
    for _ in range(k - 1):
        previous = reach
        reach = np.minimum(reach @ A_tilde, 1.0)
    return identity + reach - previous


def normalize_adjacency(A: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization D^-1/2 A D^-1/2."""
    A = np.asarray(A, dtype=np.float64)
    degrees = A.sum(axis=1)
    if np.any(degrees <= 0):
        raise ValueError(
            f"adjacency has zero row sums at nodes {np.flatnonzero(degrees <= 0).tolist()}"
        )
    inv_sqrt = 1.0 / np.sqrt(degrees)
    return A * inv_sqrt[:, None] * inv_sqrt[None, :]


@dataclass(frozen=True, eq=False)
class MultiScaleAdjacency:
    """Normalized k-adjacency matrices for k = 1..k_max, stacked as K x J x J."""

    scales: np.ndarray
    k_max: int

    def __post_init__(self):
        scales = np.array(self.scales, dtype=np.float64)
        if scales.ndim != 3 or scales.shape[0] != self.k_max:
            raise ValueError(
                f"expected {self.k_max} stacked square matrices, got shape {scales.shape}"
            )
        if not np.all(np.isfinite(scales)) or np.any(scales < 0):
            raise ValueError("adjacency scales must be finite and non-negative")
        if not np.allclose(scales, np.transpose(scales, (0, 2, 1)), atol=1e-12):
            raise ValueError("adjacency scales must be symmetric")
        scales.setflags(write=False)
        object.__setattr__(self, "scales", scales)

    @property
    def num_nodes(self) -> int:
        return self.scales.shape[1]

    @classmethod
    def from_adjacency(cls, A: np.ndarray, k_max: int) -> "MultiScaleAdjacency":
        return cls(
            np.stack([normalize_adjacency(k_adjacency(A, k)) for k in range(1, k_max + 1)]),
            k_max,
        )

    @classmethod
    def from_topology(
        cls, topo: Optional[SkeletonTopology] = None, k_max: int = 2
    ) -> "MultiScaleAdjacency":
        return cls.from_adjacency(build_adjacency(topo), k_max)
