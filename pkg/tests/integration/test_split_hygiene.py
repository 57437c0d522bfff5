"""Seeded split runs never leak subjects across train and test."""

import numpy as np
import pytest

from src.assessment.splits import make_splits, materialize
from src.models import Dataset, SkeletonSequence
from src.preprocess import AugmentationKind

pytestmark = [pytest.mark.integration, pytest.mark.slow]

KINDS = [kind.value for kind in AugmentationKind]


def expanded_cohort(rng: np.random.Generator, n_subjects: int) -> Dataset:
    """Eight records per subject: the original followed by seven augmented copies."""
    sequences = []
    for i in range(n_subjects):
        data = rng.normal(size=(3, 2, 25))
        original = SkeletonSequence(data=data, subject_id=f"p{i:03d}", label="TD")
        sequences.append(original)
        for kind in KINDS:
            sequences.append(original.with_data(data * 1.01, provenance=f"augmented:{kind}"))
    return Dataset(tuple(sequences))


@pytest.fixture(scope="module")
def cohorts():
    rng = np.random.default_rng(99)
    return {n: expanded_cohort(rng, n) for n in (10, 13, 24, 31)}


class TestSplitHygiene:
    def test_thousand_seeded_runs(self, cohorts):
        sizes = sorted(cohorts)
        leaks = separations = 0
        for seed in range(1000):
            ds = cohorts[sizes[seed % len(sizes)]]
            mode = "random" if seed % 2 else "block"
            n_folds = 2 + seed % 9
            plan = make_splits(ds, mode, n_folds=n_folds, seed=seed)
            assert plan.subjects() == ds.subjects()

            if mode == "block":
                flat = [s for fold in plan.folds for s in fold]
                assert flat == ds.subjects()

            for fold in range(len(plan)):
                train, test = materialize(ds, plan, fold)
                train_subjects, test_subjects = set(train.subjects()), set(test.subjects())
                leaks += len(train_subjects & test_subjects)
                for part in (train, test):
                    originals = {s.subject_id for s in part if not s.is_augmented}
                    separations += sum(
                        1 for s in part if s.is_augmented and s.subject_id not in originals
                    )
                assert len(test) == 8 * len(test_subjects)

        assert leaks == 0
        assert separations == 0
