import logging
import os
from typing import Optional

import numpy as np
from tqdm import tqdm

from clickbait_id import config
from clickbait_id.embed.backend import EmbeddingBackend
from clickbait_id.exceptions import EncoderError
from clickbait_id.utils import get_providers, sha256_file

__all__ = ['OnnxEncoderBackend', 'open_encoder_backend']

logger = logging.getLogger(__name__)

_INT_TYPES = {'tensor(int64)': np.int64, 'tensor(int32)': np.int32}


class OnnxEncoderBackend(EmbeddingBackend):
    """Frozen pre-trained encoder exported to ONNX, used for inference only.

    The graph must take token ids and an attention mask (both ``B x L`` integers) and return last-layer hidden
    states ``B x L x H`` as its first output. A third ``token_type_ids`` input, common in BERT exports, is fed zeros.

    Args:
        model_path: Path of the ``.onnx`` file.
        device: ``'cpu'``, ``'cuda'`` or None to use CUDA when available.
        batch_size: Sequences per inference call.
    """

    def __init__(self, model_path: str, device: Optional[str] = None, batch_size: int = config.EMBED_BATCH_SIZE):
        import onnxruntime as ort

        if not os.path.exists(model_path):
            raise EncoderError("Encoder model '{}' does not exist".format(model_path))
        try:
            session = ort.InferenceSession(model_path, providers=get_providers(device))
        except Exception as e:
            raise EncoderError("Cannot load encoder model '{}': {}".format(model_path, e))

        self.session = session
        self.batch_size = batch_size
        self._bind_inputs(model_path)
        hidden_width = self._check_output(model_path)

        name = 'onnx:{}:{}'.format(os.path.basename(model_path), sha256_file(model_path)[:16])
        super().__init__(name=name, hidden_width=hidden_width, deterministic=True)
        self.logger.info("Opened encoder '{}' with hidden width {}.".format(model_path, hidden_width))

    def _bind_inputs(self, model_path: str):
        inputs = self.session.get_inputs()
        if len(inputs) < 2:
            raise EncoderError("Encoder '{}' must take token ids and an attention mask, found inputs {}".format(
                model_path, [i.name for i in inputs]))

        by_name = {i.name: i for i in inputs}
        ids = next((i for i in inputs if 'input_ids' in i.name), inputs[0])
        mask = next((i for i in inputs if 'attention_mask' in i.name), inputs[1])
        if ids.name == mask.name:
            raise EncoderError("Encoder '{}' has ambiguous inputs {}".format(model_path, list(by_name)))
        token_types = next((i for i in inputs if 'token_type_ids' in i.name), None)

        known = {ids.name, mask.name} | ({token_types.name} if token_types is not None else set())
        extra = [n for n in by_name if n not in known]
        if extra:
            raise EncoderError("Encoder '{}' has unexpected inputs {}".format(model_path, extra))
        for inp in (ids, mask) + ((token_types,) if token_types is not None else ()):
            if inp.type not in _INT_TYPES:
                raise EncoderError("Encoder input '{}' has type {}, expected an integer tensor".format(
                    inp.name, inp.type))
            if len(inp.shape) != 2:
                raise EncoderError("Encoder input '{}' has rank {}, expected 2".format(inp.name, len(inp.shape)))

        self._ids = ids
        self._mask = mask
        self._token_types = token_types

    def _check_output(self, model_path: str) -> int:
        outputs = self.session.get_outputs()
        if not outputs:
            raise EncoderError("Encoder '{}' has no outputs".format(model_path))
        hidden = outputs[0]
        if len(hidden.shape) != 3:
            raise EncoderError("Encoder output '{}' has rank {}, expected 3 (batch, length, hidden)".format(
                hidden.name, len(hidden.shape)))
        width = hidden.shape[2]
        if not isinstance(width, int) or width < 1:
            raise EncoderError("Encoder output '{}' does not declare a fixed hidden width (got {})".format(
                hidden.name, width))
        self._output_name = hidden.name
        return width

    def embed_ids(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        chunks = []
        starts = range(0, ids.shape[0], self.batch_size)
        for start in tqdm(starts, desc='Encoding', disable=len(starts) < 2, bar_format=config.IGNITE_BAR_FORMAT):
            stop = start + self.batch_size
            feed = {
                self._ids.name: ids[start:stop].astype(_INT_TYPES[self._ids.type]),
                self._mask.name: mask[start:stop].astype(_INT_TYPES[self._mask.type]),
            }
            if self._token_types is not None:
                feed[self._token_types.name] = np.zeros_like(ids[start:stop],
                                                             dtype=_INT_TYPES[self._token_types.type])
            chunks.append(self.session.run([self._output_name], feed)[0])
        return np.concatenate(chunks, axis=0)


def open_encoder_backend(model_path: str, device: Optional[str] = None) -> OnnxEncoderBackend:
    return OnnxEncoderBackend(model_path, device=device)
