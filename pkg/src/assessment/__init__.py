"""ADOS regression, severity classes, subject splits and synthetic cohorts."""

from .ados import AdosClass, ados_classify, classify_with_tolerance
from .evaluation import RegressionMetrics, evaluate_regression, spearman
from .splits import SplitPlan, make_splits, materialize
from .svr import SvrModel, svr_fit, svr_predict

__all__ = [
    "AdosClass",
    "RegressionMetrics",
    "SplitPlan",
    "SvrModel",
    "ados_classify",
    "classify_with_tolerance",
    "evaluate_regression",
    "make_splits",
    "materialize",
    "spearman",
    "svr_fit",
    "svr_predict",
]
