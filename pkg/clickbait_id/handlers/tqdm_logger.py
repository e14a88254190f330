import numbers
import warnings
from typing import Mapping

import torch
from ignite.contrib.handlers.base_logger import BaseHandler, BaseLogger

__all__ = ['format_metrics', 'OutputHandler', 'TqdmLogger']


def format_metrics(metrics: Mapping) -> str:
    """``name=value`` pairs; large values switch to scientific notation."""
    parts = []
    for key, value in metrics.items():
        if isinstance(value, torch.Tensor) and value.ndimension() == 0:
            value = value.item()
        if not isinstance(value, numbers.Number):
            warnings.warn("Cannot format metric '{}' of type {}".format(key, type(value)))
            continue
        parts.append("{}={:.4e}".format(key, value) if value > 1e4 else "{}={:.4f}".format(key, value))
    return ", ".join(parts)


class OutputHandler(BaseHandler):
    """Writes one ``<Tag> epoch <n>: <metrics>`` line per event.

    Args:
        tag (str): message prefix, e.g. 'training'
        metric_names (list of str, optional): metrics to include, or "all".
    """

    def __init__(self, tag, metric_names="all"):
        self.tag = tag
        self.metric_names = metric_names

    def __call__(self, engine, logger, event_name):
        if not isinstance(logger, TqdmLogger):
            raise RuntimeError("Handler 'OutputHandler' works only with TqdmLogger")

        metrics = engine.state.metrics
        if self.metric_names != "all":
            metrics = {name: metrics[name] for name in self.metric_names if name in metrics}
        step = engine.state.get_event_attrib_value(event_name)
        logger.log_message("{} epoch {}: {}".format(self.tag.capitalize(), step, format_metrics(metrics)))


class TqdmLogger(BaseLogger):
    """Writes messages above an ignite progress bar, or to ``fallback`` (a ``logging.Logger``) without one."""

    def __init__(self, pbar=None, fallback=None):
        self.pbar = pbar
        self.fallback = fallback

    def log_message(self, message: str):
        if self.pbar is not None:
            self.pbar.log_message(message)
        elif self.fallback is not None:
            self.fallback.info(message)

    def close(self):
        if self.pbar:
            self.pbar.close()
        self.pbar = None

    def _create_output_handler(self, *args, **kwargs):
        return OutputHandler(*args, **kwargs)

    def _create_opt_params_handler(self, *args, **kwargs):
        """Intentionally empty"""
        pass
