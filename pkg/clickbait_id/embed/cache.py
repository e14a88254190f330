"""On-disk embedding cache, one file per (backend, sequence) key.

File layout (little endian)::

    uint32 L | uint32 H | uint32 n | n bytes backend name (UTF-8) | L*H float32, row-major

The file name is the hex SHA-256 of the backend name, the token ids and the attention mask, so backends never share
entries. Writers go through a temporary file and an atomic rename; the last writer of a key wins.
"""
import hashlib
import logging
import os
import struct
from typing import List, Optional, Sequence

import numpy as np

from clickbait_id.embed.backend import EmbeddingBackend, EmbeddingSequence, embed_batch
from clickbait_id.preprocess.wordpiece import TokenSequence
from clickbait_id.utils import atomic_write_bytes

__all__ = ['EmbeddingCache', 'cached_embed']

logger = logging.getLogger(__name__)

_HEADER = struct.Struct('<III')
_DTYPE = np.dtype('<f4')


class EmbeddingCache:
    def __init__(self, cache_dir: str):
        self.cache_dir = cache_dir
        self.hits = 0
        self.misses = 0
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)

    @staticmethod
    def key(backend_name: str, sequence: TokenSequence) -> str:
        digest = hashlib.sha256()
        digest.update(backend_name.encode('utf-8'))
        digest.update(b'\0')
        digest.update(np.ascontiguousarray(sequence.ids, dtype='<i8').tobytes())
        digest.update(np.ascontiguousarray(sequence.attention_mask, dtype='<i8').tobytes())
        return digest.hexdigest()

    def path(self, key: str) -> str:
        return os.path.join(self.cache_dir, key)

    def get(self, backend_name: str, sequence: TokenSequence, hidden_width: int) -> Optional[np.ndarray]:
        path = self.path(self.key(backend_name, sequence))
        try:
            with open(path, 'rb') as f:
                payload = f.read()
        except FileNotFoundError:
            return None

        vectors = self._decode(payload, backend_name, len(sequence), hidden_width)
        if vectors is None:
            self.logger.warning("Discarding corrupt cache entry '{}'.".format(path))
            try:
                os.remove(path)
            except FileNotFoundError:
                pass
        return vectors

    @staticmethod
    def _decode(payload: bytes, backend_name: str, length: int, hidden_width: int) -> Optional[np.ndarray]:
        if len(payload) < _HEADER.size:
            return None
        rows, cols, name_len = _HEADER.unpack_from(payload)
        body_start = _HEADER.size + name_len
        if (rows, cols) != (length, hidden_width) or len(payload) != body_start + rows * cols * _DTYPE.itemsize:
            return None
        if payload[_HEADER.size:body_start] != backend_name.encode('utf-8'):
            return None
        vectors = np.frombuffer(payload, dtype=_DTYPE, offset=body_start).reshape(rows, cols)
        if not np.isfinite(vectors).all():
            return None
        return vectors.astype(np.float32)

    def put(self, backend_name: str, sequence: TokenSequence, vectors: np.ndarray):
        name = backend_name.encode('utf-8')
        rows, cols = vectors.shape
        payload = _HEADER.pack(rows, cols, len(name)) + name + np.ascontiguousarray(vectors, dtype=_DTYPE).tobytes()
        atomic_write_bytes(self.path(self.key(backend_name, sequence)), payload)


def cached_embed(backend: EmbeddingBackend, cache_path: str,
                 sequences: Sequence[TokenSequence]) -> List[EmbeddingSequence]:
    """``embed_batch`` through the on-disk cache.

    Hits skip the backend entirely; all misses go to the backend in one batch and are written back. Vectors come back
    as float32, the stored precision, whether they were cached or freshly computed.
    """
    cache = EmbeddingCache(cache_path)
    results: List[Optional[EmbeddingSequence]] = [None] * len(sequences)
    missing = []
    for i, seq in enumerate(sequences):
        vectors = cache.get(backend.name, seq, backend.hidden_width)
        if vectors is None:
            missing.append(i)
        else:
            results[i] = EmbeddingSequence(vectors=vectors, mask=np.asarray(seq.attention_mask, dtype=np.int64))

    if missing:
        computed = embed_batch(backend, [sequences[i] for i in missing])
        for i, emb in zip(missing, computed):
            vectors = emb.vectors.astype(np.float32)
            cache.put(backend.name, sequences[i], vectors)
            results[i] = EmbeddingSequence(vectors=vectors, mask=emb.mask)

    logger.info("Embedding cache: {} hit(s), {} miss(es) for '{}'.".format(
        len(sequences) - len(missing), len(missing), backend.name))
    return results
