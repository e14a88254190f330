import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from clickbait_id.corpus.records import Label, LabeledDataset
from clickbait_id.corpus.sampling import FoldSplit, stratified_kfold
from clickbait_id.exceptions import ClickbaitError, DataError, PipelineError
from clickbait_id.metrics import ConfusionMatrix, MacroScores, auc, confusion, macro_prf, prf, roc_curve
from clickbait_id.pipelines import ClassifierPipeline

__all__ = ['METRIC_NAMES', 'FoldReport', 'ExperimentReport', 'fold_report', 'cross_validate', 'evaluate_holdout']

logger = logging.getLogger(__name__)

METRIC_NAMES = ('accuracy', 'precision', 'recall', 'f1', 'auc')


@dataclass
class FoldReport:
    """Metrics of one scored evaluation set. ``fold_index`` is None for a holdout evaluation."""
    fold_index: Optional[int]
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_points: List[Tuple[float, float]]
    auc: float
    macro: MacroScores
    degenerate: Tuple[str, ...] = ()
    ids: List[str] = field(default_factory=list)
    scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    seconds: float = 0.0

    def metric(self, name: str) -> float:
        return float(getattr(self, name))


def fold_report(fold_index: Optional[int], scores: Sequence[float], truth: Sequence, threshold: float = 0.5,
                ids: Optional[Sequence[str]] = None) -> FoldReport:
    """Score-level evaluation: threshold the scores (``>=``), then compute confusion, metrics and ROC."""
    scores = np.asarray(scores, dtype=np.float64)
    preds = [Label.CLICKBAIT if s >= threshold else Label.NON_CLICKBAIT for s in scores]
    cm = confusion(preds, truth)
    metrics = prf(cm)
    points = roc_curve(scores, truth)
    return FoldReport(fold_index=fold_index, confusion=cm, accuracy=metrics.accuracy, precision=metrics.precision,
                      recall=metrics.recall, f1=metrics.f1, roc_points=points, auc=auc(points), macro=macro_prf(cm),
                      degenerate=metrics.degenerate, ids=list(ids) if ids is not None else [], scores=scores)


@dataclass
class ExperimentReport:
    """Per-fold reports with their aggregates; standard deviations are population (ddof=0) values."""
    pipeline: str
    folds: List[FoldReport]
    config: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)

    def values(self, name: str) -> np.ndarray:
        return np.array([f.metric(name) for f in self.folds])

    def mean(self, name: str) -> float:
        return float(np.mean(self.values(name)))

    def std(self, name: str) -> float:
        return float(np.std(self.values(name)))

    @property
    def means(self) -> Dict[str, float]:
        return {name: self.mean(name) for name in METRIC_NAMES}

    @property
    def stds(self) -> Dict[str, float]:
        return {name: self.std(name) for name in METRIC_NAMES}

    @property
    def seconds(self) -> float:
        return float(sum(f.seconds for f in self.folds))


def cross_validate(dataset: LabeledDataset, pipeline: ClassifierPipeline, k: int = 5, seed: int = 0,
                   split: Optional[FoldSplit] = None, config_snapshot: Optional[Dict[str, Any]] = None) \
        -> ExperimentReport:
    """Fit ``pipeline`` on k - 1 folds and score the held-out fold, for every fold in order.

    Args:
        dataset: The labeled (usually balanced) dataset.
        pipeline: Refit from scratch on each fold.
        k: Number of folds.
        seed: Seed of the stratified split; ignored when ``split`` is given.
        split: A precomputed split, so several pipelines can share identical folds.
        config_snapshot: Stored in the report as is.

    Raises:
        PipelineError: wrapping any pipeline failure, with the fold index.
    """
    if split is None:
        split = stratified_kfold(dataset, k, seed)
    elif split.k != k or len(split.assignments) != len(dataset):
        raise ValueError("Split of {} fold(s) over {} record(s) does not fit k={} and {} record(s)".format(
            split.k, len(split.assignments), k, len(dataset)))

    folds = []
    for fold, train_idx, test_idx in split.folds():
        started = time.perf_counter()
        train_set = dataset.subset(train_idx, note='fold {} train'.format(fold))
        test_set = dataset.subset(test_idx, note='fold {} test'.format(fold))
        try:
            pipeline.fit(train_set)
            scores = pipeline.score(test_set.titles)
        except (ClickbaitError, ValueError, RuntimeError) as e:
            raise PipelineError("Pipeline '{}' failed on fold {}: {}".format(pipeline.name, fold, e),
                                fold_index=fold) from e

        report = fold_report(fold, scores, [r.final_label for r in test_set], pipeline.threshold,
                             ids=[r.id for r in test_set])
        report.seconds = time.perf_counter() - started
        folds.append(report)
        logger.info("Fold {}/{} ({}): accuracy {:.4f}, auc {:.4f}.".format(
            fold + 1, split.k, pipeline.name, report.accuracy, report.auc))

    result = ExperimentReport(pipeline=pipeline.name, folds=folds, config=dict(config_snapshot or {}),
                              seeds={'split': split.seed})
    logger.info("Cross-validation ({}): mean accuracy {:.4f} +- {:.4f}, mean auc {:.4f}.".format(
        pipeline.name, result.mean('accuracy'), result.std('accuracy'), result.mean('auc')))
    return result


def evaluate_holdout(pipeline: ClassifierPipeline, holdout: LabeledDataset) -> FoldReport:
    """Score an already fitted pipeline on a separate labeled set with the cross-validation metrics.

    Raises:
        DataError: if the holdout is empty or holds a single class.
    """
    if len(holdout) == 0:
        raise DataError("Holdout dataset is empty")
    counts = holdout.class_counts()
    if min(counts.values()) == 0:
        raise DataError("Holdout dataset must contain both classes, got {}".format(
            {label.value: n for label, n in counts.items()}))

    started = time.perf_counter()
    scores = pipeline.score(holdout.titles)
    report = fold_report(None, scores, [r.final_label for r in holdout], pipeline.threshold,
                         ids=[r.id for r in holdout])
    report.seconds = time.perf_counter() - started
    logger.info("Holdout ({} record(s)): accuracy {:.4f}, precision {:.4f}, recall {:.4f}, f1 {:.4f}.".format(
        len(holdout), report.accuracy, report.precision, report.recall, report.f1))
    return report
