import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from clickbait_id.corpus.records import Label

__all__ = ['ConfusionMatrix', 'Scores', 'MacroScores', 'as_targets', 'confusion', 'prf', 'macro_prf']

logger = logging.getLogger(__name__)


def as_targets(labels: Sequence) -> np.ndarray:
    """0/1 targets from ``Label`` values or 0/1 numbers; clickbait is 1."""
    return np.array([label.target if isinstance(label, Label) else int(label) for label in labels], dtype=np.int64)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with clickbait as the positive class."""
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self) -> 'ConfusionMatrix':
        """The same counts with non-clickbait as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


class Scores(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float
    # Names of the metrics whose denominator was zero and were reported as 0.
    degenerate: Tuple[str, ...] = ()


class MacroScores(NamedTuple):
    precision: float
    recall: float
    f1: float


def confusion(preds: Sequence, truth: Sequence) -> ConfusionMatrix:
    if len(preds) != len(truth):
        raise ValueError("Got {} prediction(s) for {} label(s)".format(len(preds), len(truth)))
    if len(preds) == 0:
        raise ValueError("Cannot build a confusion matrix from zero examples")
    p, t = as_targets(preds), as_targets(truth)
    return ConfusionMatrix(tp=int(np.sum((p == 1) & (t == 1))), fp=int(np.sum((p == 1) & (t == 0))),
                           fn=int(np.sum((p == 0) & (t == 1))), tn=int(np.sum((p == 0) & (t == 0))))


def _ratio(numerator: float, denominator: float) -> Tuple[float, bool]:
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def prf(cm: ConfusionMatrix) -> Scores:
    """Accuracy, precision, recall and F1 of the positive class.

    A metric with a zero denominator is 0 and its name is listed in ``Scores.degenerate``.
    """
    if cm.total <= 0:
        raise ValueError("Confusion matrix is empty")

    precision, no_precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall, no_recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1, no_f1 = _ratio(2 * precision * recall, precision + recall)
    degenerate = tuple(name for name, flag in (('precision', no_precision), ('recall', no_recall), ('f1', no_f1))
                       if flag)
    if degenerate:
        logger.warning("Degenerate metric(s) {} for {}.".format(list(degenerate), cm))
    return Scores(accuracy=(cm.tp + cm.tn) / cm.total, precision=precision, recall=recall, f1=f1,
                  degenerate=degenerate)


def macro_prf(cm: ConfusionMatrix) -> MacroScores:
    """Precision, recall and F1 averaged over both classes."""
    if cm.total <= 0:
        raise ValueError("Confusion matrix is empty")

    per_class = []
    for matrix in (cm, cm.swapped()):
        precision, _ = _ratio(matrix.tp, matrix.tp + matrix.fp)
        recall, _ = _ratio(matrix.tp, matrix.tp + matrix.fn)
        f1, _ = _ratio(2 * precision * recall, precision + recall)
        per_class.append((precision, recall, f1))
    precision, recall, f1 = np.mean(per_class, axis=0)
    return MacroScores(precision=float(precision), recall=float(recall), f1=float(f1))
