"""Subject-level cross-validation folds."""

from dataclasses import dataclass
from typing import List, Literal, Tuple

import numpy as np
from sklearn.model_selection import KFold

from ..errors import AnalysisError
from ..models import Dataset

SplitMode = Literal["random", "block"]


@dataclass(frozen=True)
class SplitPlan:
    """Test subjects of every fold; block folds are contiguous windows of sorted ids."""

    folds: Tuple[Tuple[str, ...], ...]
    mode: SplitMode

    def __len__(self) -> int:
        return len(self.folds)

    def subjects(self) -> List[str]:
        return sorted(s for fold in self.folds for s in fold)

    def train_subjects(self, fold: int) -> List[str]:
        return [s for i, f in enumerate(self.folds) if i != fold for s in f]


def make_splits(ds: Dataset, mode: SplitMode = "block", n_folds: int = 10, seed: int = 0) -> SplitPlan:
    """Split the dataset's subjects into ``n_folds`` disjoint test folds."""
    if mode not in ("random", "block"):
        raise AnalysisError(f"split mode must be 'random' or 'block', got {mode!r}")
    subjects = np.array(ds.subjects())
    if len(subjects) < n_folds:
        raise AnalysisError(f"{len(subjects)} subjects cannot fill {n_folds} folds")

    if mode == "block":
        kfold = KFold(n_splits=n_folds, shuffle=False)
    else:
        kfold = KFold(n_splits=n_folds, shuffle=True, random_state=seed)
    folds = tuple(
        tuple(str(s) for s in subjects[test_idx]) for _, test_idx in kfold.split(subjects)
    )
    return SplitPlan(folds=folds, mode=mode)


def materialize(ds: Dataset, plan: SplitPlan, fold: int) -> Tuple[Dataset, Dataset]:
    """Train and test datasets of one fold; records follow their subject."""
    if not 0 <= fold < len(plan):
        raise AnalysisError(f"fold {fold} out of range for {len(plan)} folds")
    return ds.select_subjects(plan.train_subjects(fold)), ds.select_subjects(plan.folds[fold])
