import logging
import time
from abc import ABC
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import torch
from ignite.contrib.handlers import ProgressBar
from ignite.engine import Engine, Events
from torch.utils.data import DataLoader, TensorDataset

from clickbait_id import config, utils
from clickbait_id.corpus.records import Label
from clickbait_id.handlers import HeadScalarHandler, OutputHandler, TqdmLogger
from clickbait_id.nn.head import HeadParams, forward, loss_and_gradients
from clickbait_id.optimizers import Adam

__all__ = ['TrainConfig', 'EpochLog', 'Trainer', 'HeadTrainer', 'train', 'predict']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Head training settings.

    ``seed`` drives the weight initialization; ``shuffle_seed`` drives the per-epoch batch order and defaults to
    ``seed`` when not given.
    """
    epochs: int = 3
    batch_size: int = 32
    seed: int = 0
    learning_rate: float = 1e-5
    threshold: float = 0.5
    shuffle_seed: Optional[int] = None
    hidden_units: int = config.HIDDEN_UNITS

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1, got {}".format(self.epochs))
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1, got {}".format(self.batch_size))
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1), got {}".format(self.threshold))
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive, got {}".format(self.learning_rate))


class EpochLog(NamedTuple):
    epoch: int
    mean_loss: float
    seconds: float


class Trainer(ABC):
    """Abstract base trainer class."""

    def __init__(self, engine: Engine, model: torch.nn.Module):
        self.engine = engine
        self.model = model
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)

    def run(self, train_loader: DataLoader, epochs: int = 10):
        self.engine.run(train_loader, max_epochs=epochs)


class HeadTrainer(Trainer):
    """Trains the classifier head with analytic gradients and a local Adam step per mini-batch.

    The per-epoch mean loss (weighted by batch size, measured before each batch's update) is stored in
    ``engine.state.metrics['loss']`` and appended to ``log``.

    Args:
        params: The head to be trained, updated in place.
        optimizer: Adam over ``params.named_parameters()``.
    """

    def __init__(self, params: HeadParams, optimizer: Adam):
        engine = self.create_head_trainer(params, optimizer)
        super().__init__(engine=engine, model=params)
        self.optimizer = optimizer
        self.log: List[EpochLog] = []
        self._loss_sum = 0.0
        self._count = 0
        self._epoch_start = 0.0

        engine.add_event_handler(Events.EPOCH_STARTED, self._reset_epoch)
        engine.add_event_handler(Events.ITERATION_COMPLETED, self._accumulate)
        engine.add_event_handler(Events.EPOCH_COMPLETED, self._complete_epoch)

    @staticmethod
    def create_head_trainer(params: HeadParams, optimizer: Adam, prepare_batch=utils.prepare_batch) -> Engine:
        def _update(_, batch: Sequence[torch.Tensor]):
            x, y = prepare_batch(batch)
            losses, grads = loss_and_gradients(params, (x, y))
            optimizer.local_step(grads)
            return float(losses.sum()), x.shape[0]

        return Engine(_update)

    def _reset_epoch(self, _):
        self._loss_sum = 0.0
        self._count = 0
        self._epoch_start = time.perf_counter()

    def _accumulate(self, engine):
        loss_sum, count = engine.state.output
        self._loss_sum += loss_sum
        self._count += count

    def _complete_epoch(self, engine):
        mean_loss = self._loss_sum / self._count
        seconds = time.perf_counter() - self._epoch_start
        engine.state.metrics['loss'] = mean_loss
        engine.state.metrics['seconds'] = seconds
        self.log.append(EpochLog(epoch=engine.state.epoch, mean_loss=mean_loss, seconds=seconds))
        self.logger.debug("Epoch {}: mean loss {:.6f} over {} example(s).".format(
            engine.state.epoch, mean_loss, self._count))

    def attach_progress(self):
        pbar = ProgressBar(persist=False, bar_format=config.IGNITE_BAR_FORMAT)
        pbar.attach(self.engine, output_transform=lambda output: {'batch_loss': output[0] / output[1]})
        tqdm_logger = TqdmLogger(pbar=pbar)
        tqdm_logger.attach(self.engine, log_handler=OutputHandler(tag='training', metric_names=['loss']),
                           event_name=Events.EPOCH_COMPLETED)
        return tqdm_logger

    def attach_tensorboard(self, log_dir: str):
        from ignite.contrib.handlers.tensorboard_logger import TensorboardLogger

        tb_logger = TensorboardLogger(log_dir=log_dir)
        tb_logger.attach_output_handler(self.engine, event_name=Events.EPOCH_COMPLETED, tag='training',
                                        metric_names=['loss'])
        tb_logger.attach(self.engine, log_handler=HeadScalarHandler(self.model, self.optimizer, tag='head'),
                         event_name=Events.EPOCH_COMPLETED)
        self.engine.add_event_handler(Events.COMPLETED, lambda _: tb_logger.close())
        return tb_logger


def _target(label) -> float:
    if isinstance(label, Label):
        return float(label.target)
    value = float(label)
    if value not in (0.0, 1.0):
        raise ValueError("Training labels must be 0 or 1, got {}".format(label))
    return value


def train(pooled_features: Sequence[Tuple[np.ndarray, object]], train_config: TrainConfig, progress: bool = False,
          tensorboard_dir: Optional[str] = None) -> Tuple[HeadParams, List[EpochLog]]:
    """Train a fresh head on pooled feature vectors.

    Args:
        pooled_features: ``(vector, label)`` pairs; a label is a ``Label`` or a 0/1 target.
        train_config: Epochs, batch size, seeds, learning rate.
        progress: Show an ignite progress bar with per-epoch loss messages.
        tensorboard_dir: When given, log per-epoch loss and parameter norms there.

    Returns:
        The trained parameters and one ``EpochLog`` per epoch.
    """
    if len(pooled_features) < 2:
        raise ValueError("Training needs at least 2 examples, got {}".format(len(pooled_features)))
    x = np.stack([np.asarray(v, dtype=np.float64) for v, _ in pooled_features])
    y = np.array([_target(label) for _, label in pooled_features])
    if y.min() == y.max():
        raise ValueError("Training data holds a single class; both classes are required")
    if not np.isfinite(x).all():
        raise ValueError("Training features contain non-finite values")

    params = HeadParams.initialize(x.shape[1], train_config.seed, train_config.hidden_units)
    optimizer = Adam(params.named_parameters(), lr=train_config.learning_rate)

    shuffle_seed = train_config.seed if train_config.shuffle_seed is None else train_config.shuffle_seed
    loader = DataLoader(TensorDataset(torch.from_numpy(x), torch.from_numpy(y)), batch_size=train_config.batch_size,
                        shuffle=True, generator=utils.torch_generator(shuffle_seed))

    trainer = HeadTrainer(params, optimizer)
    if progress:
        trainer.attach_progress()
    if tensorboard_dir is not None:
        trainer.attach_tensorboard(tensorboard_dir)

    logger.info("Training head (H={}, {} example(s), {} epoch(s), batch size {}).".format(
        x.shape[1], len(y), train_config.epochs, train_config.batch_size))
    trainer.run(loader, epochs=train_config.epochs)
    return params, trainer.log


def predict(params: HeadParams, pooled_features: Sequence[np.ndarray],
            threshold: float = 0.5) -> List[Tuple[float, Label]]:
    """Score each pooled vector; the class is clickbait iff the score is at least ``threshold``."""
    if len(pooled_features) == 0:
        return []
    scores = forward(params, np.stack([np.asarray(v, dtype=np.float64) for v in pooled_features])).tolist()
    return [(score, Label.CLICKBAIT if score >= threshold else Label.NON_CLICKBAIT) for score in scores]
