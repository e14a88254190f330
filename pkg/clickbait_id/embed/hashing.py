import hashlib
from typing import Dict

import numpy as np

from clickbait_id.embed.backend import EmbeddingBackend
from clickbait_id.utils import make_rng

__all__ = ['HashBackend', 'hash_backend']


class HashBackend(EmbeddingBackend):
    """Model-free backend giving every token id a fixed pseudo-random unit vector.

    The vector of an id is drawn from a PCG64 stream seeded by a BLAKE2b hash of ``(seed, id)``, so it depends on
    nothing but the id and the seed; positions and masks do not matter.

    Args:
        width: Vector width H.
        seed: Hash seed.
    """

    def __init__(self, width: int, seed: int = 0):
        if width < 1:
            raise ValueError("Hash embedding width must be >= 1, got {}".format(width))
        super().__init__(name='hash:{}:{}'.format(width, seed), hidden_width=width, deterministic=True)
        self.seed = seed
        self._table: Dict[int, np.ndarray] = {}

    def vector(self, token_id: int) -> np.ndarray:
        token_id = int(token_id)
        vec = self._table.get(token_id)
        if vec is None:
            digest = hashlib.blake2b('{}:{}'.format(self.seed, token_id).encode('utf-8'), digest_size=8).digest()
            rng = make_rng(int.from_bytes(digest, 'little'))
            vec = rng.standard_normal(self.hidden_width)
            vec /= np.linalg.norm(vec)
            vec.setflags(write=False)
            self._table[token_id] = vec
        return vec

    def embed_ids(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        unique, inverse = np.unique(ids, return_inverse=True)
        table = np.stack([self.vector(i) for i in unique])
        return table[inverse.reshape(ids.shape)]


def hash_backend(width: int, seed: int = 0) -> HashBackend:
    return HashBackend(width, seed)
