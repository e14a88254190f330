import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from clickbait_id.exceptions import EncoderError
from clickbait_id.preprocess.wordpiece import TokenSequence

__all__ = ['EmbeddingSequence', 'EmbeddingBackend', 'embed_batch', 'stack_sequences']

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingSequence:
    """Per-token vectors (L x H) of one headline and the attention mask they were computed under."""
    vectors: np.ndarray
    mask: np.ndarray

    @property
    def hidden_width(self) -> int:
        return self.vectors.shape[1]


class EmbeddingBackend(ABC):
    """Maps batches of token ids and masks to per-token vectors.

    Attributes:
        name: Identifies the backend (and its configuration) in cache keys.
        hidden_width: Width H of every emitted vector.
        deterministic: Identical inputs always give bitwise-identical outputs.
    """

    def __init__(self, name: str, hidden_width: int, deterministic: bool = True):
        self.name = name
        self.hidden_width = hidden_width
        self.deterministic = deterministic
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)

    @abstractmethod
    def embed_ids(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Embed a ``B x L`` id matrix under its ``B x L`` mask into a ``B x L x H`` array."""
        pass

    def __repr__(self):
        return "{}(name='{}', hidden_width={})".format(self.__class__.__name__, self.name, self.hidden_width)


def stack_sequences(sequences: Sequence[TokenSequence]):
    lengths = {len(s) for s in sequences}
    if len(lengths) > 1:
        raise ValueError("All sequences in a batch must share one length, got {}".format(sorted(lengths)))
    ids = np.stack([s.ids for s in sequences]).astype(np.int64)
    mask = np.stack([s.attention_mask for s in sequences]).astype(np.int64)
    return ids, mask


def embed_batch(backend: EmbeddingBackend, sequences: Sequence[TokenSequence]) -> List[EmbeddingSequence]:
    """Embed sequences of one common length; outputs follow input order and carry the input masks.

    Raises:
        ValueError: on mixed sequence lengths.
        EncoderError: if the backend emits a non-finite value (naming the sequence index) or a wrong shape.
    """
    if len(sequences) == 0:
        return []

    ids, mask = stack_sequences(sequences)
    vectors = backend.embed_ids(ids, mask)
    expected = (ids.shape[0], ids.shape[1], backend.hidden_width)
    if vectors.shape != expected:
        raise EncoderError("Backend '{}' returned shape {}, expected {}".format(
            backend.name, tuple(vectors.shape), expected))

    finite = np.isfinite(vectors).all(axis=(1, 2))
    if not finite.all():
        raise EncoderError("Backend '{}' produced non-finite values for sequence index {}".format(
            backend.name, int(np.flatnonzero(~finite)[0])))

    logger.debug("Embedded batch of shape {} with '{}'.".format(list(vectors.shape), backend.name))
    return [EmbeddingSequence(vectors=vectors[i], mask=mask[i].copy()) for i in range(len(sequences))]
