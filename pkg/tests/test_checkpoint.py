"""Unit tests for saving and loading trained networks."""

import json

import numpy as np
import pytest

from src.assessment.svr import svr_fit
from src.config import NetworkConfig, SvrConfig
from src.errors import DatasetFormatError
from src.network.checkpoint import load_checkpoint, save_checkpoint
from src.network.training import stack_sequences, train_classifier

TINY = NetworkConfig(k_max=2, blocks=1, channels=[4], epochs=2, batch_size=4)


@pytest.fixture
def trained(labeled_dataset):
    return train_classifier(labeled_dataset, TINY).net


class TestCheckpoint:
    """JSON checkpoints reproduce the network exactly."""

    def test_save_load_gives_identical_predictions(self, trained, labeled_dataset, tmp_path):
        path = tmp_path / "model.json"
        save_checkpoint(path, trained)
        net, svr, svr_config = load_checkpoint(path)

        X = trained.prepare(stack_sequences(labeled_dataset))
        np.testing.assert_array_equal(net.predict_proba(X), trained.predict_proba(X))
        assert net.trained
        assert net.config == TINY
        assert svr is None and svr_config is None

    def test_regressor_round_trip(self, trained, rng, tmp_path):
        features = rng.normal(size=(10, 3))
        model = svr_fit(features, features @ np.array([1.0, 2.0, 0.0]), epochs=50)
        path = tmp_path / "model.json"
        save_checkpoint(path, trained, model, SvrConfig(epochs=50))

        _, svr, svr_config = load_checkpoint(path)
        np.testing.assert_array_equal(svr.weights, model.weights)
        np.testing.assert_array_equal(svr.feature_scale, model.feature_scale)
        assert svr.bias == model.bias
        assert svr_config.epochs == 50

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\n  nope\n}")
        with pytest.raises(DatasetFormatError, match="broken.json:2"):
            load_checkpoint(path)

    def test_foreign_json_rejected(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text(json.dumps({"sequences": []}))
        with pytest.raises(DatasetFormatError, match="not a gaitscope checkpoint"):
            load_checkpoint(path)

    def test_unsupported_version(self, trained, tmp_path):
        path = tmp_path / "model.json"
        save_checkpoint(path, trained)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(DatasetFormatError, match="version"):
            load_checkpoint(path)

    def test_missing_parameter(self, trained, tmp_path):
        path = tmp_path / "model.json"
        save_checkpoint(path, trained)
        payload = json.loads(path.read_text())
        payload["parameters"] = payload["parameters"][:-1]
        path.write_text(json.dumps(payload))
        with pytest.raises(DatasetFormatError, match="do not match"):
            load_checkpoint(path)

    def test_checkpoint_is_deterministic(self, labeled_dataset, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save_checkpoint(first, train_classifier(labeled_dataset, TINY).net)
        save_checkpoint(second, train_classifier(labeled_dataset, TINY).net)
        assert first.read_bytes() == second.read_bytes()
