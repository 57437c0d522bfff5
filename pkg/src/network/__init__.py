"""Multi-scale graph convolution network."""

from .adjacency import (
    MultiScaleAdjacency,
    build_adjacency,
    k_adjacency,
    normalize_adjacency,
)
from .layers import GcnLayer, TcnLayer, gcn_forward, tcn_forward
from .model import GaitNet, forward_network
from .training import TrainingResult, train_classifier

__all__ = [
    "GaitNet",
    "GcnLayer",
    "MultiScaleAdjacency",
    "TcnLayer",
    "TrainingResult",
    "build_adjacency",
    "forward_network",
    "gcn_forward",
    "k_adjacency",
    "normalize_adjacency",
    "tcn_forward",
    "train_classifier",
]
