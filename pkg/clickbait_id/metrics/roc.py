from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata
from sklearn import metrics

from clickbait_id.metrics.classification import as_targets

__all__ = ['roc_curve', 'auc', 'pairwise_auc']


def _scores_and_targets(scores: Sequence[float], truth: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    t = as_targets(truth)
    if len(s) != len(t):
        raise ValueError("Got {} score(s) for {} label(s)".format(len(s), len(t)))
    if not np.isfinite(s).all():
        raise ValueError("Scores contain non-finite values")
    if t.sum() == 0 or t.sum() == len(t):
        raise ValueError("ROC is undefined unless both classes are present")
    return s, t


def roc_curve(scores: Sequence[float], truth: Sequence) -> List[Tuple[float, float]]:
    """(fpr, tpr) points for thresholds swept over the distinct scores, highest first.

    Examples with equal scores cross the threshold together, so each distinct score adds exactly one point. The curve
    starts at (0, 0) and ends at (1, 1).
    """
    s, t = _scores_and_targets(scores, truth)
    order = np.argsort(-s, kind='mergesort')
    s, t = s[order], t[order]

    # Last position of each run of equal scores.
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tps = np.cumsum(t)[ends]
    fps = (ends + 1) - tps
    fpr = np.r_[0, fps] / (len(t) - t.sum())
    tpr = np.r_[0, tps] / t.sum()
    return list(zip(fpr.tolist(), tpr.tolist()))


def auc(points: Sequence[Tuple[float, float]]) -> float:
    """Trapezoidal area under a ROC point list."""
    if len(points) < 2:
        raise ValueError("A ROC curve needs at least 2 points, got {}".format(len(points)))
    fpr, tpr = zip(*points)
    return float(metrics.auc(np.asarray(fpr), np.asarray(tpr)))


def pairwise_auc(scores: Sequence[float], truth: Sequence) -> float:
    """Probability that a random positive outscores a random negative, ties counted one half.

    This is the Mann-Whitney U statistic of the positive scores divided by the number of positive/negative pairs.
    """
    s, t = _scores_and_targets(scores, truth)
    n_pos = int(t.sum())
    n_neg = len(t) - n_pos
    u = rankdata(s)[t == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
