import numpy as np

from clickbait_id.embed.backend import EmbeddingSequence

__all__ = ['masked_mean_pool']


def masked_mean_pool(emb: EmbeddingSequence) -> np.ndarray:
    """Mean of the vectors at mask-1 positions, in float64. Padded positions never contribute."""
    keep = np.asarray(emb.mask) == 1
    if not keep.any():
        raise ValueError("Cannot pool a sequence whose attention mask is all zero")
    return np.asarray(emb.vectors, dtype=np.float64)[keep].mean(axis=0)
