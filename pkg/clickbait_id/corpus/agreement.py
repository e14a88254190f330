import logging
from dataclasses import replace
from typing import Sequence

import numpy as np

from clickbait_id.corpus.records import HeadlineRecord, Label, LabeledDataset
from clickbait_id.exceptions import DataError

__all__ = ['CATEGORIES', 'filter_full_agreement', 'rating_matrix', 'fleiss_kappa', 'dataset_kappa']

logger = logging.getLogger(__name__)

CATEGORIES = (Label.CLICKBAIT, Label.NON_CLICKBAIT)


def filter_full_agreement(records: Sequence[HeadlineRecord], provenance: str = '') -> LabeledDataset:
    """Keep only records whose raters all chose the same class and fix that class as the final label."""
    kept = [replace(r, final_label=r.rater_labels[0]) for r in records if r.unanimous]
    dropped = len(records) - len(kept)
    logger.info("Full-agreement filter kept {} of {} record(s), dropped {}.".format(len(kept), len(records), dropped))

    note = 'full agreement: kept {} of {}'.format(len(kept), len(records))
    return LabeledDataset(records=kept, provenance='{}; {}'.format(provenance, note) if provenance else note)


def rating_matrix(records: Sequence[HeadlineRecord]) -> np.ndarray:
    """Per-item counts of raters choosing each category, columns ordered as ``CATEGORIES``."""
    matrix = np.zeros((len(records), len(CATEGORIES)), dtype=np.int64)
    for i, record in enumerate(records):
        for label in record.rater_labels:
            matrix[i, CATEGORIES.index(label)] += 1
    return matrix


def fleiss_kappa(ratings) -> float:
    """Fleiss' kappa for an items x categories matrix of rater counts.

    Every item must carry the same number of ratings n >= 2. When all ratings fall into a single category the
    expected agreement is 1; kappa is then defined as 1.0 if the observed agreement is also 1.

    Raises:
        ValueError: on unequal or too few ratings per item, negative counts, or an undefined kappa.
    """
    ratings = np.asarray(ratings)
    if ratings.ndim != 2 or ratings.shape[0] == 0:
        raise ValueError("Ratings must be a non-empty items x categories matrix")
    if not np.issubdtype(ratings.dtype, np.integer):
        if not np.all(np.mod(ratings, 1) == 0):
            raise ValueError("Ratings must be integer counts")
        ratings = ratings.astype(np.int64)
    if (ratings < 0).any():
        raise ValueError("Ratings must be non-negative")

    per_item = ratings.sum(axis=1)
    n = int(per_item[0])
    if (per_item != n).any():
        raise ValueError("All items must have the same number of ratings, got {}".format(sorted(set(per_item))))
    if n < 2:
        raise ValueError("Each item needs at least 2 ratings, got {}".format(n))

    counts = ratings.astype(np.float64)
    observed = np.mean((np.sum(counts * counts, axis=1) - n) / (n * (n - 1)))
    proportions = counts.sum(axis=0) / counts.sum()
    expected = float(np.dot(proportions, proportions))

    if expected == 1.0:
        if observed == 1.0:
            return 1.0
        raise ValueError("Fleiss' kappa is undefined: expected agreement is 1")
    return float((observed - expected) / (1.0 - expected))


def dataset_kappa(records: Sequence[HeadlineRecord]) -> float:
    """Fleiss' kappa over the rater labels of ``records``."""
    if not records:
        raise DataError("Cannot compute agreement over an empty record list")
    return fleiss_kappa(rating_matrix(records))
