import numpy as np
import pytest

from clickbait_id.corpus import Label
from clickbait_id.metrics import ConfusionMatrix, auc, confusion, macro_prf, pairwise_auc, prf, roc_curve

CB, NC = Label.CLICKBAIT, Label.NON_CLICKBAIT


def labels_for(tp, fp, fn, tn):
    preds = [CB] * tp + [CB] * fp + [NC] * fn + [NC] * tn
    truth = [CB] * tp + [NC] * fp + [CB] * fn + [NC] * tn
    return preds, truth


def brute_force_roc(scores, truth):
    """One point per distinct threshold, predicting positive for every score >= threshold."""
    scores, truth = np.asarray(scores), np.asarray(truth)
    pos, neg = truth.sum(), len(truth) - truth.sum()
    points = [(0.0, 0.0)]
    for threshold in sorted(set(scores.tolist()), reverse=True):
        predicted = scores >= threshold
        points.append((float(np.sum(predicted & (truth == 0)) / neg), float(np.sum(predicted & (truth == 1)) / pos)))
    return points


def pairwise_oracle(scores, truth):
    pos = [s for s, t in zip(scores, truth) if t == 1]
    neg = [s for s, t in zip(scores, truth) if t == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def random_scores(rng):
    n = int(rng.integers(2, 201))
    truth = rng.integers(0, 2, size=n)
    truth[:2] = [0, 1]
    # Rounded scores so that ties occur.
    scores = np.round(rng.normal(size=n) + truth * rng.uniform(0, 2), int(rng.integers(0, 3)))
    return scores, truth


class TestConfusion:
    def test_fixture_counts(self):
        assert confusion(*labels_for(9, 2, 1, 8)) == ConfusionMatrix(tp=9, fp=2, fn=1, tn=8)

    def test_perfect_prediction(self):
        truth = [CB, NC, NC, CB]
        cm = confusion(truth, truth)
        assert cm.fp == 0 and cm.fn == 0

    def test_inverted_prediction(self):
        truth = [CB, NC, NC, CB]
        cm = confusion([label.other for label in truth], truth)
        assert cm.tp == 0 and cm.tn == 0

    def test_accepts_targets(self):
        assert confusion([1, 0, 1], [1, 1, 0]) == ConfusionMatrix(tp=1, fp=1, fn=1, tn=0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([CB], [CB, NC])

    def test_empty(self):
        with pytest.raises(ValueError):
            confusion([], [])


class TestPrf:
    def test_perfect(self):
        scores = prf(ConfusionMatrix(tp=5, fp=0, fn=0, tn=5))
        assert scores[:4] == (1.0, 1.0, 1.0, 1.0)
        assert scores.degenerate == ()

    def test_fixture(self):
        scores = prf(ConfusionMatrix(tp=9, fp=2, fn=1, tn=8))
        precision, recall = 9 / 11, 0.9
        assert scores.accuracy == pytest.approx(0.85, abs=1e-12)
        assert scores.precision == pytest.approx(precision, abs=1e-12)
        assert scores.recall == pytest.approx(recall, abs=1e-12)
        assert scores.f1 == pytest.approx(2 * precision * recall / (precision + recall), abs=1e-12)

    def test_no_positive_predictions(self, caplog):
        scores = prf(ConfusionMatrix(tp=0, fp=0, fn=3, tn=7))
        assert scores.precision == 0.0 and scores.f1 == 0.0
        assert scores.degenerate == ('precision', 'f1')
        assert 'Degenerate' in caplog.text

    def test_consistency_with_counts(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            tp, fp, fn, tn = (int(v) for v in rng.integers(1, 50, size=4))
            scores = prf(ConfusionMatrix(tp, fp, fn, tn))
            assert scores.accuracy == pytest.approx((tp + tn) / (tp + fp + fn + tn), abs=1e-12)
            assert scores.precision == pytest.approx(tp / (tp + fp), abs=1e-12)
            assert scores.recall == pytest.approx(tp / (tp + fn), abs=1e-12)

    def test_macro_averages_both_classes(self):
        cm = ConfusionMatrix(tp=9, fp=2, fn=1, tn=8)
        macro = macro_prf(cm)
        assert macro.precision == pytest.approx((9 / 11 + 8 / 9) / 2, abs=1e-12)
        assert macro.recall == pytest.approx((0.9 + 0.8) / 2, abs=1e-12)

    def test_empty_matrix(self):
        with pytest.raises(ValueError):
            prf(ConfusionMatrix(0, 0, 0, 0))


class TestRoc:
    def test_separated_scores_reach_top_left(self):
        points = roc_curve([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
        assert (0.0, 1.0) in points
        assert points[0] == (0.0, 0.0) and points[-1] == (1.0, 1.0)

    def test_all_scores_equal(self):
        assert roc_curve([0.5] * 4, [1, 0, 1, 0]) == [(0.0, 0.0), (1.0, 1.0)]

    def test_six_example_fixture(self):
        scores = [0.9, 0.7, 0.7, 0.4, 0.2, 0.2]
        truth = [1, 0, 1, 1, 0, 0]
        np.testing.assert_allclose(roc_curve(scores, truth), brute_force_roc(scores, truth), atol=1e-12)
        np.testing.assert_allclose(roc_curve(scores, truth), [(0, 0), (0, 1 / 3), (1 / 3, 2 / 3), (1 / 3, 1), (1, 1)],
                                   atol=1e-12)

    def test_matches_threshold_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            scores, truth = random_scores(rng)
            np.testing.assert_allclose(roc_curve(scores, truth), brute_force_roc(scores, truth), atol=1e-12)

    def test_monotone(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            fpr, tpr = np.array(roc_curve(*random_scores(rng))).T
            assert (np.diff(fpr) >= 0).all() and (np.diff(tpr) >= 0).all()

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(3)
        scores, truth = random_scores(rng)
        transformed = np.exp(3 * scores) + 7
        assert roc_curve(scores, truth) == roc_curve(transformed, truth)

    def test_single_class(self):
        with pytest.raises(ValueError):
            roc_curve([0.1, 0.2], [1, 1])


class TestAuc:
    def test_perfect_curve(self):
        assert auc([(0, 0), (0, 1), (1, 1)]) == 1.0

    def test_diagonal(self):
        assert auc([(0, 0), (1, 1)]) == 0.5

    def test_equals_pairwise_statistic(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            scores, truth = random_scores(rng)
            area = auc(roc_curve(scores, truth))
            assert area == pytest.approx(pairwise_oracle(scores, truth), abs=1e-12)
            assert area == pytest.approx(pairwise_auc(scores, truth), abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            auc([(0, 0)])
