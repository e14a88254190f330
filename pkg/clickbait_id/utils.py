import hashlib
import logging
import os
import tempfile
from typing import List, Optional

import numpy as np
import torch
from ignite.utils import convert_tensor

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """Seeded numpy generator used for every sampling operation.

    The bit generator is PCG64, so a given seed yields the same stream on every platform and numpy version that ships
    it.
    """
    return np.random.Generator(np.random.PCG64(seed))


def torch_generator(seed: int) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


def prepare_batch(batch, device=None, non_blocking=False):
    """Prepare batch for training: pass to a device with options."""
    x, y = batch
    return (convert_tensor(x, device=device, non_blocking=non_blocking),
            convert_tensor(y, device=device, non_blocking=non_blocking))


def get_providers(device: Optional[str] = None) -> List[str]:
    """Pick onnxruntime execution providers for the requested device.

    ``None`` means CUDA when onnxruntime reports it, else CPU. CPU always stays last as a fallback.
    """
    import onnxruntime as ort

    available = ort.get_available_providers()
    if device in (None, 'cuda') and 'CUDAExecutionProvider' in available:
        logger.info("Using CUDA execution provider.")
        return ['CUDAExecutionProvider', 'CPUExecutionProvider']
    if device == 'cuda':
        logger.warning("CUDA requested but not available, falling back to CPU.")
    return ['CPUExecutionProvider']


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_bytes(path: str, payload: bytes):
    """Write ``payload`` to ``path`` through a temporary file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
