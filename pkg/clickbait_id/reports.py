"""CSV artifacts. Every writer renders through pandas with a fixed float format, so equal inputs give equal bytes."""
import io
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from clickbait_id.corpus.records import Label
from clickbait_id.evaluators import METRIC_NAMES, ExperimentReport, FoldReport
from clickbait_id.trainers import EpochLog
from clickbait_id.utils import atomic_write_bytes

__all__ = ['FLOAT_FORMAT', 'write_frame', 'report_frame', 'experiment_frame', 'roc_frame', 'predictions_frame',
           'training_log_frame', 'comparison_frame', 'folds_won']

FLOAT_FORMAT = '%.6f'
REPORT_COLUMNS = ['fold', 'accuracy', 'precision', 'recall', 'f1', 'auc', 'tp', 'fp', 'fn', 'tn', 'macro_precision',
                  'macro_recall', 'macro_f1']
_COUNT_COLUMNS = ('tp', 'fp', 'fn', 'tn')
_MACRO_COLUMNS = ('macro_precision', 'macro_recall', 'macro_f1')


def write_frame(frame: pd.DataFrame, path: str) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT)
    atomic_write_bytes(path, buffer.getvalue().encode('utf-8'))
    return path


def _fold_row(report: FoldReport) -> dict:
    cm = report.confusion
    row = {'fold': 'holdout' if report.fold_index is None else str(report.fold_index)}
    row.update({name: report.metric(name) for name in METRIC_NAMES})
    row.update({'tp': cm.tp, 'fp': cm.fp, 'fn': cm.fn, 'tn': cm.tn})
    row.update({'macro_precision': report.macro.precision, 'macro_recall': report.macro.recall,
                'macro_f1': report.macro.f1})
    return row


def report_frame(reports: Sequence[FoldReport]) -> pd.DataFrame:
    """One row per fold plus ``mean`` and ``std`` footer rows (metric columns only; counts stay blank)."""
    rows = [_fold_row(r) for r in reports]
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    if len(reports) > 1:
        metric_columns = list(METRIC_NAMES) + list(_MACRO_COLUMNS)
        values = frame[metric_columns].to_numpy(dtype=np.float64)
        footer = pd.DataFrame([dict(zip(metric_columns, values.mean(axis=0)), fold='mean'),
                               dict(zip(metric_columns, values.std(axis=0)), fold='std')], columns=REPORT_COLUMNS)
        frame = pd.concat([frame, footer], ignore_index=True)
    for column in _COUNT_COLUMNS:
        frame[column] = frame[column].astype('Int64')
    return frame


def experiment_frame(report: ExperimentReport) -> pd.DataFrame:
    return report_frame(report.folds)


def roc_frame(reports: Sequence[FoldReport]) -> pd.DataFrame:
    rows = [{'fold': 'holdout' if r.fold_index is None else str(r.fold_index), 'fpr': fpr, 'tpr': tpr}
            for r in reports for fpr, tpr in r.roc_points]
    return pd.DataFrame(rows, columns=['fold', 'fpr', 'tpr'])


def predictions_frame(ids: Sequence[str], predictions: Sequence[Tuple[float, Label]]) -> pd.DataFrame:
    return pd.DataFrame({'id': list(ids), 'score': [float(s) for s, _ in predictions],
                         'label': [label.value for _, label in predictions]}, columns=['id', 'score', 'label'])


def training_log_frame(log: Sequence[EpochLog]) -> pd.DataFrame:
    return pd.DataFrame([e._asdict() for e in log], columns=['epoch', 'mean_loss', 'seconds'])


def folds_won(reports: Dict[str, ExperimentReport]) -> Dict[str, int]:
    """Folds on which each model has strictly the highest accuracy; tied folds count for nobody."""
    names = list(reports)
    won = {name: 0 for name in names}
    n_folds = min(len(r.folds) for r in reports.values())
    for fold in range(n_folds):
        accuracies = [reports[name].folds[fold].accuracy for name in names]
        best = max(accuracies)
        if accuracies.count(best) == 1:
            won[names[accuracies.index(best)]] += 1
    return won


def comparison_frame(reports: Dict[str, ExperimentReport]) -> pd.DataFrame:
    """Summary row per model. Wall time goes to the run manifest, which keeps this file reproducible."""
    won = folds_won(reports)
    rows: List[dict] = []
    for name, report in reports.items():
        rows.append({'model': name, 'mean_accuracy': report.mean('accuracy'), 'std_accuracy': report.std('accuracy'),
                     'mean_auc': report.mean('auc'), 'folds_won': won[name]})
    return pd.DataFrame(rows, columns=['model', 'mean_accuracy', 'std_accuracy', 'mean_auc', 'folds_won'])
