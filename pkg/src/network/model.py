"""The GCN -> TCN classifier used for TD/ASD prediction and clip embeddings."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..angle_features import angle_embed_batch
from ..config import NetworkConfig
from ..topology import SkeletonTopology, default_topology
from .adjacency import MultiScaleAdjacency
from .layers import GcnLayer, TcnLayer, as_batch, uniform_init

NUM_CLASSES = 2
CLASS_NAMES = ("TD", "ASD")


@dataclass(eq=False)
class GaitNet:
    """Alternating GCN/TCN blocks, global average pooling and a 2-way linear head."""

    config: NetworkConfig
    msa: MultiScaleAdjacency
    gcn: List[GcnLayer]
    tcn: List[TcnLayer]
    head_weights: np.ndarray
    head_bias: np.ndarray
    in_channels: int = 3
    topology_name: str = "kinect25"
    trained: bool = False

    @classmethod
    def initialize(
        cls,
        config: NetworkConfig,
        topo: Optional[SkeletonTopology] = None,
        in_channels: int = 3,
    ) -> "GaitNet":
        """Fresh network with seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights."""
        topo = topo or default_topology()
        rng = np.random.default_rng(config.seed)
        msa = MultiScaleAdjacency.from_topology(topo, config.k_max)

        gcn, tcn = [], []
        channels = in_channels
        for width in config.channels:
            gcn.append(GcnLayer.initialize(rng, channels, width, config.k_max))
            tcn.append(TcnLayer.initialize(rng, width, config.temporal_window))
            channels = width

        return cls(
            config=config,
            msa=msa,
            gcn=gcn,
            tcn=tcn,
            head_weights=uniform_init(rng, (channels, NUM_CLASSES), channels),
            head_bias=np.zeros(NUM_CLASSES),
            in_channels=in_channels,
            topology_name=topo.name,
        )

    @property
    def embedding_dim(self) -> int:
        return self.head_weights.shape[0]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Named parameter arrays in a fixed order; updates happen in place."""
        params: Dict[str, np.ndarray] = {}
        for i, (g, t) in enumerate(zip(self.gcn, self.tcn)):
            params[f"gcn{i}.weights"] = g.weights
            params[f"gcn{i}.bias"] = g.bias
            params[f"tcn{i}.kernel"] = t.kernel
        params["head.weights"] = self.head_weights
        params["head.bias"] = self.head_bias
        return params

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters().values())

    def prepare(self, X: np.ndarray) -> np.ndarray:
        """Apply the input-side angle embedding when it is enabled."""
        batch, single = as_batch(X)
        if self.config.angle_embedding:
            batch = angle_embed_batch(batch)
        return batch[0] if single else batch

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, dict]:
        """Logits (N x 2), pooled embeddings (N x C_last) and the backward cache."""
        h, _ = as_batch(X)
        if h.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {h.shape[1]}")
        caches = []
        for g, t in zip(self.gcn, self.tcn):
            h, gcache = g.forward(h, self.msa)
            h, tcache = t.forward(h)
            caches.append((gcache, tcache))
        pooled_shape = h.shape
        embedding = h.mean(axis=(2, 3))
        logits = embedding @ self.head_weights + self.head_bias
        return logits, embedding, {
            "blocks": caches,
            "pooled_shape": pooled_shape,
            "embedding": embedding,
        }

    def backward(
        self,
        cache: dict,
        dlogits: np.ndarray,
        dembedding: Optional[np.ndarray] = None,
    ) -> Dict[str, np.ndarray]:
        """Gradients of every parameter given upstream gradients of logits and embedding."""
        grads: Dict[str, np.ndarray] = {
            "head.weights": cache["embedding"].T @ dlogits,
            "head.bias": dlogits.sum(axis=0),
        }
        demb = dlogits @ self.head_weights.T
        if dembedding is not None:
            demb = demb + dembedding

        N, C, T, J = cache["pooled_shape"]
        dh = np.broadcast_to(demb[:, :, None, None] / (T * J), (N, C, T, J))
        for i in reversed(range(len(self.gcn))):
            gcache, tcache = cache["blocks"][i]
            dh, tgrads = self.tcn[i].backward(dh, tcache)
            dh, ggrads = self.gcn[i].backward(dh, gcache, self.msa)
            grads[f"tcn{i}.kernel"] = tgrads["kernel"]
            grads[f"gcn{i}.weights"] = ggrads["weights"]
            grads[f"gcn{i}.bias"] = ggrads["bias"]
        return {name: grads[name] for name in self.parameters()}

    def relu_masks(self, cache: dict) -> List[np.ndarray]:
        return [gcache["mask"] for gcache, _ in cache["blocks"]]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """P(ASD) per sample of an already prepared batch."""
        logits, _, _ = self.forward(X)
        return softmax(logits)[:, 1]

    def predict(self, X: np.ndarray) -> np.ndarray:
        logits, _, _ = self.forward(X)
        return np.argmax(logits, axis=1)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def forward_network(X: np.ndarray, net: GaitNet) -> Tuple[np.ndarray, np.ndarray]:
    """Logits and pooled embedding of one prepared C x T x J sample (or a batch)."""
    batch, single = as_batch(X)
    logits, embedding, _ = net.forward(batch)
    if single:
        return logits[0], embedding[0]
    return logits, embedding
