"""Central finite-difference check of the analytic training gradients."""

from typing import Dict, Optional

import numpy as np

from ..logger import get_logger
from ..skepxel import PatchEncoder
from .model import GaitNet
from .training import loss_and_gradients

logger = get_logger("network.gradcheck")

# Gradients smaller than this in both estimates count as agreeing
ABSOLUTE_FLOOR = 1e-6


def relative_error(analytic: float, numeric: float, floor: float = ABSOLUTE_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def gradient_check(
    net: GaitNet,
    X: np.ndarray,
    label: int | np.ndarray,
    encoder: Optional[PatchEncoder] = None,
    image: Optional[np.ndarray] = None,
    lambda_distance: float = 1.0,
    h: float = 1e-5,
) -> float:
    """Largest relative error between analytic and central-difference gradients.

    ``X`` is one prepared C x T x J sample (or a batch) and ``image`` the matching
    Skepxel pixels. Coordinates whose perturbation flips a ReLU are skipped, since
    the loss is not differentiable across the kink.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 3:
        X = X[None]
    y = np.atleast_1d(np.asarray(label, dtype=int))
    images = None
    if encoder is not None and image is not None:
        images = np.asarray(image, dtype=np.float64)
        if images.ndim == 3:
            images = images[None]

    def evaluate():
        step = loss_and_gradients(net, X, y, encoder, images, lambda_distance)
        _, _, cache = net.forward(X)
        return step, net.relu_masks(cache)

    base, base_masks = evaluate()
    params: Dict[str, np.ndarray] = dict(net.parameters())
    if encoder is not None:
        params.update(encoder.parameters())

    worst = 0.0
    skipped = 0
    for name, param in params.items():
        analytic = base.grads[name]
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + h
            plus, plus_masks = evaluate()
            param[idx] = original - h
            minus, minus_masks = evaluate()
            param[idx] = original

            if any(
                not np.array_equal(a, b) or not np.array_equal(a, c)
                for a, b, c in zip(base_masks, plus_masks, minus_masks)
            ):
                skipped += 1
                continue
            numeric = (plus.total - minus.total) / (2 * h)
            worst = max(worst, relative_error(analytic[idx], numeric))

    logger.info(
        f"Gradient check max relative error {worst:.3e}",
        extra={"max_relative_error": worst, "skipped_kinks": skipped},
    )
    return worst
