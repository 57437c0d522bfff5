"""Regression metrics: mean absolute error and Spearman correlation."""

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata, spearmanr

from ..errors import AnalysisError

MIN_CORRELATION_SAMPLES = 3


@dataclass(frozen=True)
class RegressionMetrics:
    mean_abs_error: float
    spearman: float
    p_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def spearman(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Rank correlation with average ranks for ties; NaN when a side is constant."""
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.size < 2 or np.ptp(predicted) == 0 or np.ptp(actual) == 0:
        return float("nan")
    return float(np.clip(spearmanr(predicted, actual)[0], -1.0, 1.0))


def permutation_p_value(
    predicted: Sequence[float],
    actual: Sequence[float],
    permutations: int = 10000,
    seed: int = 0,
) -> float:
    """Two-sided p-value of the Spearman correlation under shuffled predictions."""
    observed = spearman(predicted, actual)
    if np.isnan(observed):
        return float("nan")

    # null distribution: correlation of ranks after shuffling the predicted ranks
    rp = rankdata(predicted)
    ra = rankdata(actual)

    rng = np.random.default_rng(seed)
    shuffled = rng.permuted(np.tile(rp, (permutations, 1)), axis=1)
    centered = shuffled - shuffled.mean(axis=1, keepdims=True)
    da = ra - ra.mean()
    null = centered @ da / np.sqrt(np.sum(centered**2, axis=1) * np.sum(da**2))
    exceed = int(np.sum(np.abs(null) >= abs(observed) - 1e-12))
    return (1 + exceed) / (1 + permutations)


def evaluate_regression(
    predicted: Sequence[float],
    actual: Sequence[float],
    permutations: int = 10000,
    seed: int = 0,
) -> RegressionMetrics:
    """MAE, Spearman correlation and its permutation p-value.

    The correlation and p-value are NaN for fewer than three samples.
    """
    p = np.asarray(predicted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.shape != a.shape or p.ndim != 1:
        raise AnalysisError(f"predicted {p.shape} and actual {a.shape} must be equal-length lists")
    if len(p) == 0:
        raise AnalysisError("no predictions to evaluate")

    mae = float(np.mean(np.abs(p - a)))
    if len(p) < MIN_CORRELATION_SAMPLES:
        return RegressionMetrics(mae, float("nan"), float("nan"))
    return RegressionMetrics(
        mean_abs_error=mae,
        spearman=spearman(p, a),
        p_value=permutation_p_value(p, a, permutations, seed),
    )
