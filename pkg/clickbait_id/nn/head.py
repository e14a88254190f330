"""Pooled-MLP classifier head: ``sigmoid(w2 . relu(W1 x + b1) + b2)`` with hand-written gradients.

Parameters are float64 tensors that never require autograd; the trainer applies the analytic gradients from
``gradients`` through a local optimizer step.

Params file layout (little endian)::

    8 bytes magic b'CBHEAD\\0\\0' | uint32 version | uint32 H | uint32 U
    float64 W1[U, H] | float64 b1[U] | float64 w2[U] | float64 b2
"""
import math
import struct
from typing import Dict, Optional, Tuple

import numpy as np
import torch
from torch import nn

from clickbait_id import config
from clickbait_id.exceptions import ParamsFormatError
from clickbait_id.utils import atomic_write_bytes, torch_generator

__all__ = ['HeadParams', 'forward', 'logits', 'bce_loss', 'loss_and_gradients', 'gradients', 'save_params',
           'load_params', 'BCE_EPS']

BCE_EPS = 1e-7
PARAMS_MAGIC = b'CBHEAD\0\0'
PARAMS_VERSION = 1
_HEADER = struct.Struct('<8sIII')
_DTYPE = np.dtype('<f8')


class HeadParams(nn.Module):
    """Weights of the head. ``W1`` is ``U x H``, ``b1`` and ``w2`` have ``U`` entries and ``b2`` is a scalar."""

    def __init__(self, hidden_width: int, hidden_units: int = config.HIDDEN_UNITS):
        super().__init__()
        self.W1 = nn.Parameter(torch.zeros(hidden_units, hidden_width, dtype=torch.float64), requires_grad=False)
        self.b1 = nn.Parameter(torch.zeros(hidden_units, dtype=torch.float64), requires_grad=False)
        self.w2 = nn.Parameter(torch.zeros(hidden_units, dtype=torch.float64), requires_grad=False)
        self.b2 = nn.Parameter(torch.zeros((), dtype=torch.float64), requires_grad=False)

    @classmethod
    def initialize(cls, hidden_width: int, seed: int, hidden_units: int = config.HIDDEN_UNITS) -> 'HeadParams':
        """Fan-in uniform ``W1`` in ``[-1/sqrt(H), 1/sqrt(H)]``; biases and ``w2`` start at zero."""
        params = cls(hidden_width, hidden_units)
        bound = 1.0 / math.sqrt(hidden_width)
        generator = torch_generator(seed)
        with torch.no_grad():
            params.W1.copy_(torch.rand(hidden_units, hidden_width, generator=generator, dtype=torch.float64)
                            * (2 * bound) - bound)
        return params

    @property
    def hidden_width(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_units(self) -> int:
        return self.W1.shape[0]

    def forward(self, x):
        return forward(self, x)

    def tensors(self) -> Dict[str, torch.Tensor]:
        return {name: p.data for name, p in self.named_parameters()}

    def equal(self, other: 'HeadParams') -> bool:
        return all(torch.equal(a, b) for a, b in zip(self.parameters(), other.parameters()))


def _features(x) -> torch.Tensor:
    return torch.as_tensor(np.asarray(x, dtype=np.float64) if not isinstance(x, torch.Tensor) else x,
                           dtype=torch.float64)


def _hidden(params: HeadParams, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    pre = x @ params.W1.t() + params.b1
    return pre, torch.relu(pre)


def logits(params: HeadParams, x) -> torch.Tensor:
    x = _features(x)
    if x.shape[-1] != params.hidden_width:
        raise ValueError("Feature width {} does not match head width {}".format(x.shape[-1], params.hidden_width))
    if not torch.isfinite(x).all():
        raise ValueError("Head input contains non-finite values")
    _, h = _hidden(params, x)
    return h @ params.w2 + params.b2


def forward(params: HeadParams, x) -> torch.Tensor:
    """Clickbait probability for one pooled vector (0-d result) or a ``B x H`` batch (length-B result)."""
    with torch.no_grad():
        return torch.sigmoid(logits(params, x))


def bce_loss(p, y, eps: float = BCE_EPS) -> torch.Tensor:
    """Binary cross-entropy with ``p`` clamped to ``[eps, 1 - eps]``."""
    p = torch.clamp(torch.as_tensor(p, dtype=torch.float64), eps, 1.0 - eps)
    y = torch.as_tensor(y, dtype=torch.float64)
    return -(y * torch.log(p) + (1.0 - y) * torch.log1p(-p))


def _stack_batch(batch) -> Tuple[torch.Tensor, torch.Tensor]:
    if isinstance(batch, tuple) and len(batch) == 2 and getattr(batch[0], 'ndim', None) == 2:
        x, y = batch
    else:
        if len(batch) == 0:
            raise ValueError("Cannot compute gradients of an empty batch")
        x = np.stack([np.asarray(v, dtype=np.float64) for v, _ in batch])
        y = np.array([float(label) for _, label in batch])
    return _features(x), torch.as_tensor(y, dtype=torch.float64)


def loss_and_gradients(params: HeadParams, batch, eps: float = BCE_EPS) \
        -> Tuple[torch.Tensor, Dict[str, torch.Tensor]]:
    """Per-example losses and the exact mean-over-batch gradient of ``bce_loss(forward(x), y)``.

    Where the clamp in ``bce_loss`` is active the loss is flat, so those examples contribute no gradient. The ReLU
    subgradient at 0 is 0.
    """
    x, y = _stack_batch(batch)
    if x.shape[0] == 0:
        raise ValueError("Cannot compute gradients of an empty batch")

    with torch.no_grad():
        pre, h = _hidden(params, x)
        z = h @ params.w2 + params.b2
        p = torch.sigmoid(z)
        losses = bce_loss(p, y, eps)

        inside = ((p > eps) & (p < 1.0 - eps)).to(torch.float64)
        dz = (p - y) * inside / x.shape[0]
        dpre = torch.outer(dz, params.w2) * (pre > 0).to(torch.float64)
        grads = {
            'W1': dpre.t() @ x,
            'b1': dpre.sum(dim=0),
            'w2': h.t() @ dz,
            'b2': dz.sum(),
        }
    return losses, grads


def gradients(params: HeadParams, batch, eps: float = BCE_EPS) -> Dict[str, torch.Tensor]:
    return loss_and_gradients(params, batch, eps)[1]


def save_params(params: HeadParams, path: str):
    header = _HEADER.pack(PARAMS_MAGIC, PARAMS_VERSION, params.hidden_width, params.hidden_units)
    body = b''.join(np.ascontiguousarray(t.detach().cpu().numpy(), dtype=_DTYPE).tobytes()
                    for t in (params.W1, params.b1, params.w2, params.b2))
    atomic_write_bytes(path, header + body)


def load_params(path: str, expected_width: Optional[int] = None) -> HeadParams:
    """Read a params file written by ``save_params``.

    Raises:
        ParamsFormatError: on a wrong magic or version, a truncated file, or a width different from
            ``expected_width``.
    """
    with open(path, 'rb') as f:
        payload = f.read()
    if len(payload) < _HEADER.size:
        raise ParamsFormatError("Params file '{}' is truncated ({} bytes)".format(path, len(payload)))

    magic, version, width, units = _HEADER.unpack_from(payload)
    if magic != PARAMS_MAGIC:
        raise ParamsFormatError("'{}' is not a head params file".format(path))
    if version != PARAMS_VERSION:
        raise ParamsFormatError("Params file '{}' has version {}, expected {}".format(path, version, PARAMS_VERSION))
    if expected_width is not None and width != expected_width:
        raise ParamsFormatError("Params file '{}' has hidden width {}, but the embedding backend emits {}".format(
            path, width, expected_width))

    count = units * width + 2 * units + 1
    if len(payload) != _HEADER.size + count * _DTYPE.itemsize:
        raise ParamsFormatError("Params file '{}' has {} bytes, expected {}".format(
            path, len(payload), _HEADER.size + count * _DTYPE.itemsize))

    values = np.frombuffer(payload, dtype=_DTYPE, offset=_HEADER.size).astype(np.float64)
    params = HeadParams(width, units)
    offset = 0
    with torch.no_grad():
        for tensor in (params.W1, params.b1, params.w2, params.b2):
            size = tensor.numel()
            tensor.copy_(torch.from_numpy(values[offset:offset + size].copy()).reshape(tensor.shape))
            offset += size
    if not all(torch.isfinite(t).all() for t in params.parameters()):
        raise ParamsFormatError("Params file '{}' holds non-finite values".format(path))
    return params
