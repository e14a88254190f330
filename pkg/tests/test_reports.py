import pandas as pd
import pytest

from clickbait_id import reports
from clickbait_id.corpus import Label
from clickbait_id.evaluators import ExperimentReport, fold_report
from clickbait_id.trainers import EpochLog

TRUTH = [1, 1, 0, 0]


def experiment(name, scores_per_fold):
    return ExperimentReport(pipeline=name, folds=[fold_report(i, s, TRUTH) for i, s in enumerate(scores_per_fold)])


class TestReportFrame:
    def test_layout_with_footer(self):
        frame = reports.report_frame(experiment('p', [[0.9, 0.8, 0.1, 0.2], [0.9, 0.4, 0.6, 0.1]]).folds)
        assert list(frame.columns) == reports.REPORT_COLUMNS
        assert frame['fold'].tolist() == ['0', '1', 'mean', 'std']
        assert frame.loc[2, 'accuracy'] == pytest.approx(0.75)
        assert frame.loc[3, 'accuracy'] == pytest.approx(0.25)
        assert str(frame['tp'].dtype) == 'Int64'
        assert frame.loc[2, ['tp', 'fp', 'fn', 'tn']].isna().all()

    def test_single_report_has_no_footer(self):
        frame = reports.report_frame([fold_report(None, [0.9, 0.8, 0.1, 0.2], TRUTH)])
        assert frame['fold'].tolist() == ['holdout']

    def test_written_csv(self, tmp_path):
        path = str(tmp_path / 'report.csv')
        reports.write_frame(reports.report_frame(experiment('p', [[0.9, 0.8, 0.1, 0.2]] * 2).folds), path)
        with open(path) as f:
            lines = f.read().splitlines()
        assert lines[0] == ','.join(reports.REPORT_COLUMNS)
        assert lines[1].startswith('0,1.000000,1.000000,1.000000,1.000000,1.000000,2,0,0,2,')
        assert lines[3] == 'mean,' + ','.join(['1.000000'] * 5) + ',,,,,' + ','.join(['1.000000'] * 3)


class TestRocAndPredictions:
    def test_roc_rows(self):
        frame = reports.roc_frame(experiment('p', [[0.9, 0.8, 0.1, 0.2]]).folds)
        assert frame[['fpr', 'tpr']].values.tolist()[0] == [0.0, 0.0]
        assert frame[['fpr', 'tpr']].values.tolist()[-1] == [1.0, 1.0]
        assert set(frame['fold']) == {'0'}

    def test_predictions(self):
        frame = reports.predictions_frame(['a', 'b'], [(0.75, Label.CLICKBAIT), (0.25, Label.NON_CLICKBAIT)])
        assert frame.to_dict('records') == [{'id': 'a', 'score': 0.75, 'label': 'clickbait'},
                                            {'id': 'b', 'score': 0.25, 'label': 'non-clickbait'}]

    def test_training_log(self):
        frame = reports.training_log_frame([EpochLog(1, 0.5, 0.1), EpochLog(2, 0.25, 0.1)])
        assert list(frame.columns) == ['epoch', 'mean_loss', 'seconds']
        assert frame['mean_loss'].tolist() == [0.5, 0.25]


class TestComparison:
    def test_folds_won_counts_strict_winners(self):
        a = experiment('a', [[0.9, 0.8, 0.1, 0.2], [0.9, 0.4, 0.6, 0.1], [0.9, 0.8, 0.1, 0.2]])
        b = experiment('b', [[0.9, 0.4, 0.6, 0.1], [0.9, 0.8, 0.1, 0.2], [0.9, 0.8, 0.1, 0.2]])
        assert reports.folds_won({'a': a, 'b': b}) == {'a': 1, 'b': 1}

    def test_comparison_frame(self):
        a = experiment('a', [[0.9, 0.8, 0.1, 0.2], [0.9, 0.8, 0.1, 0.2]])
        b = experiment('b', [[0.9, 0.4, 0.6, 0.1], [0.9, 0.4, 0.6, 0.1]])
        frame = reports.comparison_frame({'a': a, 'b': b})
        assert list(frame.columns) == ['model', 'mean_accuracy', 'std_accuracy', 'mean_auc', 'folds_won']
        assert frame['model'].tolist() == ['a', 'b']
        assert frame['folds_won'].tolist() == [2, 0]
        pd.testing.assert_series_equal(frame['mean_accuracy'], pd.Series([1.0, 0.5], name='mean_accuracy'))
