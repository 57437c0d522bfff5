"""Mini-batch gradient-descent training of GaitNet with optional Skepxel co-learning."""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import NetworkConfig, SkepxelConfig
from ..errors import SkeletonValidationError
from ..logger import MetricsLogger, get_logger
from ..models import LABELS, Dataset
from ..skepxel import PatchEncoder, batch_distance_loss, build_image, generate_orderings
from .model import GaitNet, softmax

logger = get_logger("network.training")
metrics = MetricsLogger()


@dataclass
class TrainingResult:
    """Trained network, optional co-learning encoder and per-epoch loss history."""

    net: GaitNet
    encoder: Optional[PatchEncoder] = None
    history: List[float] = field(default_factory=list)
    classification_history: List[float] = field(default_factory=list)
    distance_history: List[float] = field(default_factory=list)
    train_accuracy: float = float("nan")


@dataclass
class LossBreakdown:
    total: float
    classification: float
    distance: float
    grads: Dict[str, np.ndarray]


def stack_sequences(ds: Dataset) -> np.ndarray:
    """N x C x T x J array of a dataset whose records share one length."""
    lengths = {seq.num_frames for seq in ds.sequences}
    if len(lengths) > 1:
        raise SkeletonValidationError(
            f"records have different frame counts {sorted(lengths)}; preprocess first"
        )
    return np.stack([seq.data for seq in ds.sequences])


def label_vector(ds: Dataset) -> np.ndarray:
    """Class indices (TD=0, ASD=1); every record must be labelled."""
    labels = []
    for i, seq in enumerate(ds.sequences):
        if seq.label is None:
            raise SkeletonValidationError(
                f"record {i} ({seq.subject_id}) has no label; training needs labelled data"
            )
        labels.append(LABELS.index(seq.label))
    return np.array(labels, dtype=int)


def skepxel_batch(ds: Dataset, config: SkepxelConfig) -> np.ndarray:
    """N x 3 x H x W Skepxel images sharing one set of orderings."""
    orderings = generate_orderings(config.orderings, config.seed)
    return np.stack(
        [build_image(seq, config.orderings, config.frames, config.seed, orderings).pixels
         for seq in ds.sequences]
    )


def loss_and_gradients(
    net: GaitNet,
    X: np.ndarray,
    y: np.ndarray,
    encoder: Optional[PatchEncoder] = None,
    images: Optional[np.ndarray] = None,
    lambda_distance: float = 0.0,
) -> LossBreakdown:
    """Cross-entropy plus ``lambda_distance`` times the mean embedding distance."""
    logits, embedding, cache = net.forward(X)
    n = len(y)
    probs = softmax(logits)
    classification = float(-np.mean(np.log(np.maximum(probs[np.arange(n), y], 1e-300))))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    distance = 0.0
    dembedding = None
    encoder_grads: Dict[str, np.ndarray] = {}
    if encoder is not None and images is not None:
        skepxel_embedding, enc_cache = encoder.forward(images)
        distance, ddist = batch_distance_loss(embedding, skepxel_embedding)
        dembedding = lambda_distance * ddist
        encoder_grads = encoder.backward(-dembedding, enc_cache)

    grads = net.backward(cache, dlogits, dembedding)
    grads.update(encoder_grads)
    return LossBreakdown(
        total=classification + lambda_distance * distance,
        classification=classification,
        distance=distance,
        grads=grads,
    )


def _clip(grads: Dict[str, np.ndarray], max_norm: Optional[float]) -> None:
    if max_norm is None:
        return
    norm = np.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
    if norm > max_norm:
        for g in grads.values():
            g *= max_norm / norm


def train_classifier(
    train: Dataset,
    config: NetworkConfig,
    skepxel_config: Optional[SkepxelConfig] = None,
) -> TrainingResult:
    """Train a fresh network; co-learning runs when ``config.co_learning`` is set."""
    start = time.time()
    y = label_vector(train)
    if len(y) == 0:
        raise SkeletonValidationError("training set is empty")

    net = GaitNet.initialize(config, train.topology)
    X = net.prepare(stack_sequences(train))

    encoder = None
    images = None
    if config.co_learning:
        skepxel_config = skepxel_config or SkepxelConfig(seed=config.seed)
        images = skepxel_batch(train, skepxel_config)
        encoder = PatchEncoder.initialize(
            images.shape[1:],
            skepxel_config.patch_size,
            skepxel_config.embed_dim,
            net.embedding_dim,
            skepxel_config.seed,
        )

    params = dict(net.parameters())
    if encoder is not None:
        params.update(encoder.parameters())

    logger.info(
        f"Training on {len(y)} records for {config.epochs} epochs",
        extra={
            "records": len(y),
            "parameters": sum(p.size for p in params.values()),
            "co_learning": config.co_learning,
            "angle_embedding": config.angle_embedding,
        },
    )

    result = TrainingResult(net=net, encoder=encoder)
    rng = np.random.default_rng([config.seed, 1])
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(y))
        totals, ces, dists = [], [], []
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo : lo + config.batch_size]
            step = loss_and_gradients(
                net,
                X[batch],
                y[batch],
                encoder,
                images[batch] if images is not None else None,
                config.lambda_distance,
            )
            _clip(step.grads, config.grad_clip)
            for name, grad in step.grads.items():
                params[name] -= config.learning_rate * grad
            totals.append(step.total)
            ces.append(step.classification)
            dists.append(step.distance)

        epoch_loss = float(np.mean(totals))
        result.history.append(epoch_loss)
        result.classification_history.append(float(np.mean(ces)))
        result.distance_history.append(float(np.mean(dists)))
        metrics.log_epoch(epoch, epoch_loss, result.classification_history[-1], result.distance_history[-1])

    net.trained = True
    result.train_accuracy = float(np.mean(net.predict(X) == y))
    metrics.log_stage(
        "train",
        time.time() - start,
        records=len(y),
        final_loss=result.history[-1],
        train_accuracy=result.train_accuracy,
    )
    return result


def evaluate_classifier(net: GaitNet, ds: Dataset) -> Tuple[float, np.ndarray]:
    """Accuracy and predicted class indices on a labelled dataset."""
    if len(ds) == 0:
        return float("nan"), np.array([], dtype=int)
    y = label_vector(ds)
    predicted = net.predict(net.prepare(stack_sequences(ds)))
    return float(np.mean(predicted == y)), predicted
