import torch
from ignite.contrib.handlers.base_logger import BaseHandler
from ignite.contrib.handlers.tensorboard_logger import TensorboardLogger

__all__ = ['HeadScalarHandler']


class HeadScalarHandler(BaseHandler):
    """Logs the classifier head's parameter norms, and the Adam step count when an optimizer is given.

    Scalars are written as ``<tag>/norm/<param>`` and ``<tag>/adam_steps``, one point per event.

    Args:
        params (HeadParams): the head being trained
        optimizer (Adam, optional): its optimizer
        tag (str, optional): common title for all produced plots, e.g. 'head'
    """

    def __init__(self, params, optimizer=None, tag=None):
        self.params = params
        self.optimizer = optimizer
        self.tag = tag

    def __call__(self, engine, logger, event_name):
        if not isinstance(logger, TensorboardLogger):
            raise RuntimeError("Handler 'HeadScalarHandler' works only with TensorboardLogger")

        step = engine.state.get_event_attrib_value(event_name)
        prefix = "{}/".format(self.tag) if self.tag else ""
        for name, p in self.params.named_parameters():
            logger.writer.add_scalar("{}norm/{}".format(prefix, name), float(torch.norm(p.data)), step)
        if self.optimizer is not None:
            logger.writer.add_scalar("{}adam_steps".format(prefix), self.optimizer.t, step)
