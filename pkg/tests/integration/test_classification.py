"""Training the angle-embedded network on synthetic cohorts."""

import time

import pytest

from src.assessment.synth import synthesize
from src.config import NetworkConfig, PreprocessConfig, SynthConfig
from src.models import Dataset
from src.network.training import evaluate_classifier, train_classifier
from src.preprocess import preprocess_dataset

pytestmark = [pytest.mark.integration, pytest.mark.slow]


def train_test_cohorts(n_train: int, n_test: int, **signal) -> tuple[Dataset, Dataset]:
    """Balanced train and test cohorts drawn with different seeds."""
    train = synthesize(SynthConfig(n_td=n_train // 2, n_asd=n_train // 2, seed=11, **signal))
    test = synthesize(SynthConfig(n_td=n_test // 2, n_asd=n_test // 2, seed=12, **signal))
    config = PreprocessConfig()
    return preprocess_dataset(train, config), preprocess_dataset(test, config)


class TestSyntheticSeparability:
    """The classifier picks up injected lean, asymmetry and cadence."""

    def test_separable_cohort(self):
        train, test = train_test_cohorts(
            80, 20, slant_deg=15.0, asymmetry_ratio=1.5, speed_ratio=0.7, noise_sigma=0.005
        )
        start = time.time()
        result = train_classifier(train, NetworkConfig(epochs=200, seed=0))
        accuracy, _ = evaluate_classifier(result.net, test)

        assert accuracy >= 0.95
        assert time.time() - start < 300

    def test_no_signal_stays_at_chance(self):
        train, test = train_test_cohorts(
            80, 100, slant_deg=0.0, asymmetry_ratio=1.0, speed_ratio=1.0, noise_sigma=0.005
        )
        result = train_classifier(train, NetworkConfig(epochs=200, seed=0))
        accuracy, _ = evaluate_classifier(result.net, test)

        assert 0.35 <= accuracy <= 0.65
