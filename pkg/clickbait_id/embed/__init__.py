from .backend import *
from .cache import *
from .encoder import *
from .hashing import *


def backend_from_spec(spec: str, device=None) -> EmbeddingBackend:
    """Build a backend from ``hash:<width>:<seed>`` or the path of an ONNX encoder export."""
    if spec.startswith('hash:'):
        parts = spec.split(':')
        if len(parts) != 3:
            raise ValueError("Hash backend spec must be 'hash:<width>:<seed>', got '{}'".format(spec))
        return hash_backend(int(parts[1]), int(parts[2]))
    return open_encoder_backend(spec, device=device)
