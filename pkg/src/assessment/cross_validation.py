"""Subject-level k-fold evaluation of the classifier and the ADOS regressor."""

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np

from ..config import RunConfig
from ..logger import MetricsLogger, get_logger
from ..models import Dataset
from ..network.model import GaitNet
from ..network.training import evaluate_classifier, train_classifier
from .ados import ScoreAccuracy, classify_with_tolerance, per_score_accuracy
from .clip_features import clip_feature_matrix
from .evaluation import evaluate_regression
from .splits import SplitPlan, make_splits, materialize
from .svr import SvrModel, svr_fit, svr_predict

logger = get_logger("assessment.cross_validation")
metrics = MetricsLogger()

FOLD_COLUMNS = (
    "fold",
    "accuracy",
    "noaug_accuracy",
    "mae",
    "spearman",
    "p_value",
    "ados_class_accuracy",
)
PER_SCORE_COLUMNS = ("score", "n", "correct", "accuracy")

NAN = float("nan")


@dataclass
class FoldResult:
    fold: int
    accuracy: float
    noaug_accuracy: float
    mae: float = NAN
    spearman: float = NAN
    p_value: float = NAN
    ados_class_accuracy: float = NAN
    train_records: int = 0
    test_records: int = 0

    def row(self) -> List[str]:
        return [str(self.fold)] + [_fmt(getattr(self, c)) for c in FOLD_COLUMNS[1:]]


@dataclass
class CrossValidationReport:
    mode: str
    folds: List[FoldResult] = field(default_factory=list)
    per_score: Dict[int, ScoreAccuracy] = field(default_factory=dict)

    def summary(self) -> Dict[str, Dict[str, float]]:
        """Mean, standard deviation and maximum of every metric over folds."""
        out = {}
        for column in FOLD_COLUMNS[1:]:
            values = np.array([getattr(f, column) for f in self.folds], dtype=np.float64)
            values = values[~np.isnan(values)]
            if values.size == 0:
                out[column] = {"mean": NAN, "std": NAN, "max": NAN}
            else:
                out[column] = {
                    "mean": float(values.mean()),
                    "std": float(values.std()),
                    "max": float(values.max()),
                }
        return out

    def to_dict(self) -> dict:
        return _json_safe(
            {
                "mode": self.mode,
                "folds": [
                    {c: getattr(f, c) for c in FOLD_COLUMNS} for f in self.folds
                ],
                "per_score": [
                    {
                        "score": s.score,
                        "n": s.count,
                        "correct": s.correct,
                        "accuracy": s.accuracy,
                    }
                    for s in self.per_score.values()
                ],
                "summary": self.summary(),
            }
        )


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else repr(float(value))


def _json_safe(value):
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def fit_ados_regressor(
    train: Dataset, net: GaitNet, config: RunConfig
) -> Optional[SvrModel]:
    """SVR on the video features of every training record that carries an ADOS score."""
    scored = Dataset(
        tuple(s for s in train if s.ados is not None), train.topology, train.preprocessed
    )
    if len(scored) < 2:
        return None
    svr_cfg = config.svr
    features = clip_feature_matrix(scored, net, svr_cfg.clip_frames, svr_cfg.n_clips)
    scores = np.array([s.ados.score for s in scored], dtype=np.float64)
    return svr_fit(
        features,
        scores,
        epsilon=svr_cfg.epsilon,
        C=svr_cfg.C,
        seed=svr_cfg.seed,
        epochs=svr_cfg.epochs,
        step_size=svr_cfg.step_size,
    )


def run_fold(
    ds: Dataset, plan: SplitPlan, fold: int, config: RunConfig
) -> tuple[FoldResult, List[float], list]:
    """Train and score one fold; also returns the raw ADOS predictions and records."""
    train, test = materialize(ds, plan, fold)
    trained = train_classifier(train, config.network, config.skepxel)
    net = trained.net

    accuracy, _ = evaluate_classifier(net, test)
    noaug_accuracy, _ = evaluate_classifier(net, test.originals())
    result = FoldResult(
        fold=fold,
        accuracy=accuracy,
        noaug_accuracy=noaug_accuracy,
        train_records=len(train),
        test_records=len(test),
    )

    # scores are predicted for original test recordings only
    scored_test = Dataset(
        tuple(s for s in test.originals() if s.ados is not None),
        test.topology,
        test.preprocessed,
    )
    svr = fit_ados_regressor(train, net, config)
    predictions: List[float] = []
    records = []
    if svr is not None and len(scored_test) > 0:
        features = clip_feature_matrix(
            scored_test, net, config.svr.clip_frames, config.svr.n_clips
        )
        predictions = [float(p) for p in np.atleast_1d(svr_predict(svr, features))]
        records = [s.ados for s in scored_test]
        regression = evaluate_regression(
            predictions,
            [r.score for r in records],
            permutations=config.split.permutations,
            seed=config.split.seed,
        )
        result.mae = regression.mean_abs_error
        result.spearman = regression.spearman
        result.p_value = regression.p_value
        result.ados_class_accuracy = float(
            np.mean(
                [
                    classify_with_tolerance(p, r, config.svr.tolerance)
                    for p, r in zip(predictions, records)
                ]
            )
        )
    return result, predictions, records


def cross_validate(
    ds: Dataset,
    config: RunConfig,
    mode: Optional[Literal["random", "block"]] = None,
) -> CrossValidationReport:
    """Run every fold of a subject-level split and collect per-fold metrics."""
    mode = mode or config.split.mode
    plan = make_splits(ds, mode, config.split.n_folds, config.split.seed)
    report = CrossValidationReport(mode=mode)
    all_predictions: List[float] = []
    all_records = []

    for fold in range(len(plan)):
        start = time.time()
        result, predictions, records = run_fold(ds, plan, fold, config)
        report.folds.append(result)
        all_predictions.extend(predictions)
        all_records.extend(records)
        metrics.log_fold(
            fold,
            {
                **{c: getattr(result, c) for c in FOLD_COLUMNS[1:]},
                "duration_seconds": time.time() - start,
            },
        )

    report.per_score = per_score_accuracy(all_predictions, all_records, config.svr.tolerance)
    logger.info(
        f"Cross-validation finished over {len(plan)} {mode} folds",
        extra={"mode": mode, "folds": len(plan), "subjects": len(ds.subjects())},
    )
    return report


def write_fold_csv(report: CrossValidationReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(FOLD_COLUMNS)
        for fold in report.folds:
            writer.writerow(fold.row())


def write_per_score_csv(report: CrossValidationReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(PER_SCORE_COLUMNS)
        for entry in report.per_score.values():
            writer.writerow([entry.score, entry.count, entry.correct, _fmt(entry.accuracy)])


def write_report_json(report: CrossValidationReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2)
        f.write("\n")
