"""Graph and temporal convolution layers with hand-written backward passes.

Every tensor is batched as N x C x T x J. The public ``gcn_forward`` and
``tcn_forward`` helpers also accept a single C x T x J sample.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .adjacency import MultiScaleAdjacency

Cache = Dict[str, np.ndarray]


def as_batch(X: np.ndarray) -> Tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 3:
        return X[None], True
    if X.ndim != 4:
        raise ValueError(f"expected a C x T x J or N x C x T x J tensor, got {X.shape}")
    return X, False


def uniform_init(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass(eq=False)
class GcnLayer:
    """Multi-scale graph convolution: aggregate per scale, concatenate, project, ReLU.

    ``weights`` is (K * C_in) x C_out; row ``k * C_in + c`` maps channel ``c`` of
    scale ``k``.
    """

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ValueError(
                f"GCN weights {self.weights.shape} and bias {self.bias.shape} do not conform"
            )

    @property
    def out_channels(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def initialize(
        cls, rng: np.random.Generator, in_channels: int, out_channels: int, k_max: int
    ) -> "GcnLayer":
        fan_in = in_channels * k_max
        return cls(
            weights=uniform_init(rng, (fan_in, out_channels), fan_in),
            bias=np.zeros(out_channels),
        )

    def forward(
        self, X: np.ndarray, msa: MultiScaleAdjacency, activate: bool = True
    ) -> Tuple[np.ndarray, Cache]:
        N, C, T, J = X.shape
        if J != msa.num_nodes:
            raise ValueError(f"input has {J} joints, adjacency has {msa.num_nodes}")
        if C * msa.k_max != self.weights.shape[0]:
            raise ValueError(
                f"input has {C} channels, layer expects {self.weights.shape[0] // msa.k_max}"
            )
        # N x K x C x T x J, then scales folded into channels
        aggregated = np.einsum("nctj,kji->nkcti", X, msa.scales)
        stacked = aggregated.reshape(N, msa.k_max * C, T, J)
        pre = np.einsum("nitj,io->notj", stacked, self.weights)
        pre += self.bias[None, :, None, None]
        if activate:
            mask = pre > 0
            out = np.where(mask, pre, 0.0)
        else:
            mask = np.ones(pre.shape, dtype=bool)
            out = pre
        return out, {"stacked": stacked, "mask": mask, "in_channels": C}

    def backward(
        self, dout: np.ndarray, cache: Cache, msa: MultiScaleAdjacency
    ) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        dpre = dout * cache["mask"]
        stacked = cache["stacked"]
        grads = {
            "weights": np.einsum("nitj,notj->io", stacked, dpre),
            "bias": dpre.sum(axis=(0, 2, 3)),
        }
        dstacked = np.einsum("notj,io->nitj", dpre, self.weights)
        N, _, T, J = dstacked.shape
        dagg = dstacked.reshape(N, msa.k_max, cache["in_channels"], T, J)
        dX = np.einsum("nkcti,kji->nctj", dagg, msa.scales)
        return dX, grads


@dataclass(eq=False)
class TcnLayer:
    """Same-padded temporal convolution with a C_out x C_in x W kernel, stride 1."""

    kernel: np.ndarray

    def __post_init__(self):
        if self.kernel.ndim != 3 or self.kernel.shape[2] % 2 == 0:
            raise ValueError(f"TCN kernel must be C x C x W with odd W, got {self.kernel.shape}")

    @property
    def window(self) -> int:
        return self.kernel.shape[2]

    @classmethod
    def initialize(
        cls, rng: np.random.Generator, channels: int, window: int
    ) -> "TcnLayer":
        fan_in = channels * window
        return cls(kernel=uniform_init(rng, (channels, channels, window), fan_in))

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, Cache]:
        N, C, T, J = X.shape
        if C != self.kernel.shape[1]:
            raise ValueError(f"input has {C} channels, kernel expects {self.kernel.shape[1]}")
        if self.window > 2 * T - 1:
            raise ValueError(f"temporal window {self.window} too wide for {T} frames")
        pad = self.window // 2
        padded = np.pad(X, ((0, 0), (0, 0), (pad, pad), (0, 0)))
        out = np.zeros((N, self.kernel.shape[0], T, J))
        for w in range(self.window):
            out += np.einsum("oi,nitj->notj", self.kernel[:, :, w], padded[:, :, w : w + T])
        return out, {"padded": padded}

    def backward(self, dout: np.ndarray, cache: Cache) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        padded = cache["padded"]
        T = dout.shape[2]
        pad = self.window // 2
        dkernel = np.zeros_like(self.kernel)
        dpadded = np.zeros_like(padded)
        for w in range(self.window):
            dkernel[:, :, w] = np.einsum("notj,nitj->oi", dout, padded[:, :, w : w + T])
            dpadded[:, :, w : w + T] += np.einsum("oi,notj->nitj", self.kernel[:, :, w], dout)
        return dpadded[:, :, pad : pad + T], {"kernel": dkernel}


def gcn_forward(
    X: np.ndarray, msa: MultiScaleAdjacency, layer: GcnLayer, activate: bool = True
) -> np.ndarray:
    """Apply one graph convolution; ``activate=False`` returns the pre-activation."""
    batch, single = as_batch(X)
    out, _ = layer.forward(batch, msa, activate)
    return out[0] if single else out


def tcn_forward(X: np.ndarray, layer: TcnLayer) -> np.ndarray:
    """Apply one temporal convolution (cross-correlation with zero padding)."""
    batch, single = as_batch(X)
    out, _ = layer.forward(batch)
    return out[0] if single else out
