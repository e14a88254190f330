import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from clickbait_id.corpus.records import Label, LabeledDataset
from clickbait_id.exceptions import DataError
from clickbait_id.utils import make_rng

__all__ = ['balance_undersample', 'FoldSplit', 'stratified_kfold']

logger = logging.getLogger(__name__)

CLASS_ORDER = (Label.CLICKBAIT, Label.NON_CLICKBAIT)


def _class_indices(dataset: LabeledDataset):
    return {label: np.array([i for i, r in enumerate(dataset.records) if r.final_label is label], dtype=np.int64)
            for label in CLASS_ORDER}


def balance_undersample(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Downsample the majority class, without replacement, to the size of the minority class.

    The minority class is kept intact and retained records keep their input order, so the output depends only on the
    input and ``seed``. The seed is appended to the dataset's seed log.
    """
    by_class = _class_indices(dataset)
    sizes = {label: len(idx) for label, idx in by_class.items()}
    if min(sizes.values()) == 0:
        raise DataError("Cannot balance a single-class dataset: {}".format(
            {label.value: size for label, size in sizes.items()}))

    minority = min(CLASS_ORDER, key=lambda label: (sizes[label], CLASS_ORDER.index(label)))
    majority = minority.other
    target = sizes[minority]

    rng = make_rng(seed)
    picked = rng.choice(by_class[majority], size=target, replace=False)
    keep = np.sort(np.concatenate([by_class[minority], picked]))

    logger.info("Balanced classes: kept {} {} of {} and all {} {}.".format(
        target, majority.value, sizes[majority], target, minority.value))
    balanced = dataset.subset(keep, note='balanced to {} per class'.format(target))
    balanced.seed_log.append(('balance_undersample', seed))
    return balanced


@dataclass
class FoldSplit:
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def folds(self) -> Iterator[Tuple[int, np.ndarray, np.ndarray]]:
        for fold in range(self.k):
            yield fold, self.train_indices(fold), self.test_indices(fold)

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def stratified_kfold(dataset: LabeledDataset, k: int, seed: int) -> FoldSplit:
    """Assign every record to one of ``k`` folds, stratified by class.

    Each class is shuffled with the seeded generator and dealt round-robin over the folds. The deal for a class starts
    where the previous class stopped, so per-class counts differ by at most one across folds and the leftover records
    of the two classes land in different folds.

    Raises:
        ValueError: if ``k < 2``.
        DataError: if a class has fewer than ``k`` members.
    """
    if k < 2:
        raise ValueError("k must be >= 2, got {}".format(k))

    by_class = _class_indices(dataset)
    for label, idx in by_class.items():
        if len(idx) < k:
            raise DataError("Class '{}' has {} member(s), fewer than k={}".format(label.value, len(idx), k))

    rng = make_rng(seed)
    assignments = np.full(len(dataset), -1, dtype=np.int64)
    offset = 0
    for label in CLASS_ORDER:
        shuffled = rng.permutation(by_class[label])
        assignments[shuffled] = (offset + np.arange(len(shuffled))) % k
        offset = (offset + len(shuffled)) % k

    split = FoldSplit(k=k, assignments=assignments, seed=seed)
    logger.debug("Fold sizes: {}.".format(split.fold_sizes().tolist()))
    return split
