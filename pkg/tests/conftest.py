"""Pytest configuration and shared fixtures."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config import SynthConfig  # noqa: E402
from src.models import AdosRecord, Dataset  # noqa: E402
from src.topology import default_topology  # noqa: E402
from tests.helpers import random_sequence  # noqa: E402


def pytest_configure(config):
    """Configure pytest markers."""
    config.addinivalue_line("markers", "integration: mark test as integration test")
    config.addinivalue_line("markers", "slow: mark test as slow running test")


@pytest.fixture
def topo():
    return default_topology()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sequence(rng):
    """One random 12-frame full-body sequence."""
    return random_sequence(rng)


@pytest.fixture
def labeled_dataset(rng):
    """Eight subjects, alternating TD and ASD, ASD records carrying ADOS scores."""
    sequences = []
    for i in range(8):
        label = "ASD" if i % 2 else "TD"
        ados = AdosRecord(score=8 + i, module_id=1, age_years=4) if label == "ASD" else None
        sequences.append(
            random_sequence(rng, subject_id=f"subj_{i:02d}", label=label, ados=ados)
        )
    return Dataset(tuple(sequences))


@pytest.fixture
def small_synth_config():
    return SynthConfig(n_td=6, n_asd=6, frames=16, period_frames=16.0, seed=3)
