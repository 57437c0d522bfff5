"""Linear epsilon-insensitive support vector regression."""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from ..errors import AnalysisError
from ..logger import get_logger

logger = get_logger("assessment.svr")


@dataclass(eq=False)
class SvrModel:
    """Linear regressor ``w . standardize(x) + b`` with its training hyperparameters."""

    weights: np.ndarray
    bias: float
    epsilon: float = 0.5
    C: float = 1.0
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    history: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        dim = self.weights.shape[0]
        if self.feature_mean is None:
            self.feature_mean = np.zeros(dim)
        if self.feature_scale is None:
            self.feature_scale = np.ones(dim)
        self.feature_mean = np.asarray(self.feature_mean, dtype=np.float64)
        self.feature_scale = np.asarray(self.feature_scale, dtype=np.float64)
        if self.epsilon < 0:
            raise AnalysisError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.C <= 0:
            raise AnalysisError(f"C must be positive, got {self.C}")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise AnalysisError("SVR parameters must be finite")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def standardize(self, features: np.ndarray) -> np.ndarray:
        return (features - self.feature_mean) / self.feature_scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "epsilon": self.epsilon,
            "C": self.C,
            "feature_mean": self.feature_mean.tolist(),
            "feature_scale": self.feature_scale.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SvrModel":
        return cls(
            weights=np.array(data["weights"], dtype=np.float64),
            bias=float(data["bias"]),
            epsilon=float(data["epsilon"]),
            C=float(data["C"]),
            feature_mean=np.array(data["feature_mean"], dtype=np.float64),
            feature_scale=np.array(data["feature_scale"], dtype=np.float64),
        )


def svr_objective(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, epsilon: float, C: float
) -> float:
    """0.5 ||w||^2 + C * sum(max(0, |w.x + b - y| - epsilon))."""
    residual = X @ weights + bias - y
    return float(0.5 * weights @ weights + C * np.sum(np.maximum(0.0, np.abs(residual) - epsilon)))


def svr_fit(
    features: np.ndarray,
    scores: np.ndarray,
    epsilon: float = 0.5,
    C: float = 1.0,
    seed: int = 0,
    epochs: int = 2000,
    step_size: float = 1.0,
) -> SvrModel:
    """Fit by full-batch normalized subgradient descent on standardized features.

    The step at epoch t is ``step_size / sqrt(t)`` along the unit subgradient, and the
    returned model is the best iterate seen, starting from the zero model.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(scores, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or len(X) != len(y):
        raise AnalysisError(
            f"features {X.shape} and scores {y.shape} do not describe the same samples"
        )
    if len(y) < 2:
        raise AnalysisError(f"SVR needs at least 2 samples, got {len(y)}")

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Xs = (X - mean) / scale

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1e-3, X.shape[1])
    b = float(np.median(y))

    best_w, best_b = np.zeros(X.shape[1]), 0.0
    best = svr_objective(best_w, best_b, Xs, y, epsilon, C)
    history: List[float] = []
    for t in range(1, epochs + 1):
        current = svr_objective(w, b, Xs, y, epsilon, C)
        if current < best:
            best, best_w, best_b = current, w.copy(), b
        history.append(best)

        residual = Xs @ w + b - y
        active = np.where(np.abs(residual) > epsilon, np.sign(residual), 0.0)
        grad_w = w + C * (Xs.T @ active)
        grad_b = C * float(active.sum())
        norm = np.sqrt(grad_w @ grad_w + grad_b**2)
        if norm == 0:
            break
        lr = step_size / np.sqrt(t)
        w = w - lr * grad_w / norm
        b = b - lr * grad_b / norm

    final = svr_objective(w, b, Xs, y, epsilon, C)
    if final < best:
        best, best_w, best_b = final, w.copy(), b
        history.append(best)

    logger.debug(
        f"SVR fit on {len(y)} samples, objective {best:.4f}",
        extra={"samples": len(y), "features": X.shape[1], "objective": best},
    )
    return SvrModel(
        weights=best_w,
        bias=best_b,
        epsilon=epsilon,
        C=C,
        feature_mean=mean,
        feature_scale=scale,
        history=history,
    )


def svr_predict(model: SvrModel, features: np.ndarray) -> float | np.ndarray:
    """Score of one feature vector, or of every row of a matrix."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise AnalysisError(f"feature dimension {x.shape[-1]} does not match model {model.dim}")
    prediction = model.standardize(x) @ model.weights + model.bias
    return float(prediction) if x.ndim == 1 else prediction
