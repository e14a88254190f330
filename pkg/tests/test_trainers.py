import os

import numpy as np
import pytest
from sklearn.linear_model import LogisticRegression

from clickbait_id.corpus import Label
from clickbait_id.nn import HeadParams
from clickbait_id.trainers import TrainConfig, predict, train


def separable_fixture(n=200, width=16, seed=0):
    """Points at +-3u plus small noise along a random unit direction u; labels are the side of the origin."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=width)
    u /= np.linalg.norm(u)
    y = np.arange(n) % 2
    x = np.where(y[:, None] == 1, 3.0, -3.0) * u + rng.normal(scale=0.3, size=(n, width))
    return x, y


def accuracy(params, x, y):
    predicted = np.array([label.target for _, label in predict(params, list(x))])
    return float(np.mean(predicted == y))


class TestTrainConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert (config.epochs, config.batch_size, config.learning_rate, config.threshold) == (3, 32, 1e-5, 0.5)

    @pytest.mark.parametrize('kwargs', [{'epochs': 0}, {'threshold': 1.0}, {'threshold': 0.0}, {'batch_size': 0},
                                        {'learning_rate': 0.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestTrain:
    def test_fixture_is_linearly_separable(self):
        x, y = separable_fixture()
        assert LogisticRegression().fit(x, y).score(x, y) == 1.0

    def test_learns_separable_fixture(self):
        x, y = separable_fixture()
        params, log = train(list(zip(x, y)), TrainConfig(learning_rate=1e-3, seed=0))
        assert accuracy(params, x, y) >= 0.95
        assert [e.epoch for e in log] == [1, 2, 3]

    def test_loss_non_increasing(self):
        x, y = separable_fixture()
        _, log = train(list(zip(x, y)), TrainConfig(learning_rate=1e-3, seed=0))
        losses = [e.mean_loss for e in log]
        assert all(b <= a for a, b in zip(losses, losses[1:])), losses

    def test_deterministic(self):
        x, y = separable_fixture(seed=3)
        config = TrainConfig(learning_rate=1e-3, seed=7, batch_size=16)
        first, first_log = train(list(zip(x, y)), config)
        second, second_log = train(list(zip(x, y)), config)
        assert first.equal(second)
        assert [e.mean_loss for e in first_log] == [e.mean_loss for e in second_log]

    def test_seed_changes_initialization(self):
        x, y = separable_fixture()
        a, _ = train(list(zip(x, y)), TrainConfig(seed=1, epochs=1))
        b, _ = train(list(zip(x, y)), TrainConfig(seed=2, epochs=1))
        assert not a.equal(b)

    def test_accepts_labels(self):
        x, y = separable_fixture(n=20)
        labels = [Label.CLICKBAIT if t else Label.NON_CLICKBAIT for t in y]
        params, _ = train(list(zip(x, labels)), TrainConfig(epochs=1))
        assert params.hidden_width == 16 and params.hidden_units == 100

    def test_single_class(self):
        x, _ = separable_fixture(n=10)
        with pytest.raises(ValueError, match='single class'):
            train([(v, 1) for v in x], TrainConfig())

    def test_too_few_examples(self):
        with pytest.raises(ValueError):
            train([(np.zeros(3), 1)], TrainConfig())

    def test_tensorboard_logging(self, tmp_path):
        x, y = separable_fixture(n=40)
        log_dir = str(tmp_path / 'tb')
        train(list(zip(x, y)), TrainConfig(epochs=1), tensorboard_dir=log_dir)
        assert any(name.startswith('events.out.tfevents') for name in os.listdir(log_dir))


class TestPredict:
    def test_threshold_rule(self):
        params = HeadParams(2, 1)
        # All-zero params score exactly 0.5.
        assert predict(params, [np.zeros(2)], threshold=0.5) == [(0.5, Label.CLICKBAIT)]
        assert predict(params, [np.zeros(2)], threshold=0.6)[0][1] is Label.NON_CLICKBAIT

    def test_empty(self):
        assert predict(HeadParams(2), []) == []


class TestProgress:
    def test_progress_bar_run(self):
        x, y = separable_fixture(n=40)
        params, log = train(list(zip(x, y)), TrainConfig(epochs=2), progress=True)
        assert len(log) == 2
