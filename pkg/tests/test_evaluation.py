import numpy as np
import pytest

import oracles
from bothound.errors import DataFormatError
from bothound.evaluation import (
    CHI2_CRIT_95,
    ascii_roc,
    chi_squared,
    confusion_metrics,
    evaluate_predictions,
    impurity_importance,
    permutation_importance,
    roc_auc,
)
from bothound.models import DecisionTree, RandomForest, fit_bagging
from bothound.synth import linearly_separable

scipy_stats = pytest.importorskip("scipy.stats")


class TestConfusionMetrics:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 1, 0, 1])
        report = confusion_metrics(y, y)
        assert (report.accuracy, report.precision, report.recall, report.f1) == (1, 1, 1, 1)

    def test_all_human_on_imbalanced(self):
        y = np.array([0] * 90 + [1] * 10)
        report = confusion_metrics(y, np.zeros(100, dtype=int))
        assert report.accuracy == pytest.approx(0.9)
        assert report.recall == 0.0
        assert report.f1 == 0.0

    def test_closed_form_case(self):
        # tp=2, fp=1, fn=2, tn=0
        y_true = np.array([1, 1, 1, 1, 0])
        y_pred = np.array([1, 1, 0, 0, 1])
        report = confusion_metrics(y_true, y_pred)
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(1 / 2)
        assert report.f1 == pytest.approx(4 / 7)
        assert report.confusion == (2, 1, 0, 2)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        y_true = rng.integers(0, 2, 50)
        y_pred = rng.integers(0, 2, 50)
        base = confusion_metrics(y_true, y_pred)
        perm = rng.permutation(50)
        shuffled = confusion_metrics(y_true[perm], y_pred[perm])
        assert base == shuffled

    def test_length_mismatch(self):
        with pytest.raises(DataFormatError):
            confusion_metrics(np.array([1]), np.array([1, 0]))


class TestRocAuc:
    def test_perfect_separation(self):
        y = np.array([0, 0, 1, 1])
        _, auc = roc_auc(y, np.array([0.1, 0.2, 0.8, 0.9]))
        assert auc == 1.0

    def test_all_ties_half(self):
        y = np.array([0, 1, 0, 1])
        points, auc = roc_auc(y, np.ones(4))
        assert auc == pytest.approx(0.5)
        assert points[0][:2] == (0.0, 0.0)
        assert points[-1][:2] == (1.0, 1.0)

    def test_trapezoid_equals_pairwise_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(200):
            n = 100
            y = rng.integers(0, 2, n)
            if y.min() == y.max():
                y[0] = 1 - y[0]
            scores = np.round(rng.random(n), 2)  # rounding forces ties
            _, auc = roc_auc(y, scores)
            assert auc == pytest.approx(oracles.auc_pairwise(y, scores), abs=1e-9)

    def test_monotone_roc_points(self):
        rng = np.random.default_rng(2)
        y = rng.integers(0, 2, 60)
        y[:2] = [0, 1]
        points, _ = roc_auc(y, rng.random(60))
        fprs = [p[0] for p in points]
        tprs = [p[1] for p in points]
        assert fprs == sorted(fprs)
        assert tprs == sorted(tprs)
        assert points[0][:2] == (0.0, 0.0) and points[-1][:2] == (1.0, 1.0)

    def test_single_class_rejected(self):
        with pytest.raises(DataFormatError):
            roc_auc(np.ones(5), np.random.random(5))

    def test_evaluate_predictions_bundles_everything(self):
        y = np.array([0, 0, 1, 1, 1])
        scores = np.array([0.1, 0.6, 0.7, 0.8, 0.2])
        report = evaluate_predictions(y, scores, threshold=0.5)
        assert report.auc is not None and report.roc is not None
        assert report.confusion == (2, 1, 1, 1)


class TestPermutationImportance:
    def fit_model(self, informative=0):
        rng = np.random.default_rng(3)
        n = 600
        X = rng.uniform(0, 4, size=(n, 5))
        y = (X[:, informative] > 2).astype(int)
        model = fit_bagging(X, y, "tree", {"max_depth": 6}, m=5, seed=1)
        return model, X, y

    def test_unused_column_near_zero(self):
        model, X, y = self.fit_model()
        importance = permutation_importance(model, X, y, repeats=10, seed=0)
        for j in (1, 2, 3, 4):
            assert abs(importance[j]) < 0.01

    def test_sole_informative_feature_dominates(self):
        model, X, y = self.fit_model(informative=2)
        importance = permutation_importance(model, X, y, repeats=10, seed=0)
        assert importance.argmax() == 2
        assert importance[2] > 0.2

    def test_label_leak_probe_is_maximal(self):
        rng = np.random.default_rng(4)
        n = 500
        X = rng.uniform(0, 1, size=(n, 4))
        y = rng.integers(0, 2, n)
        X[:, 3] = y  # leak the label into a column
        model = fit_bagging(X, y, "tree", {"max_depth": 4}, m=5, seed=2)
        importance = permutation_importance(model, X, y, repeats=10, seed=1)
        assert importance.argmax() == 3
        assert importance[3] > 0.0

    def test_noise_column_small_mean_many_rows(self):
        rng = np.random.default_rng(5)
        n = 1000
        X = rng.uniform(0, 4, size=(n, 3))
        y = (X[:, 0] > 2).astype(int)
        X[:, 1] = rng.random(n)  # pure noise
        model = fit_bagging(X, y, "tree", {"max_depth": 5}, m=5, seed=3)
        importance = permutation_importance(model, X, y, repeats=10, seed=2)
        assert abs(importance[1]) < 0.02


class TestImpurityImportance:
    def test_depth_one_tree_single_feature(self):
        X = np.array([[-1.0, 5.0], [1.0, 5.0], [-2.0, 5.0], [2.0, 5.0]])
        y = np.array([0, 1, 0, 1])
        tree = DecisionTree(max_depth=1).fit(X, y)
        weights = impurity_importance(tree)
        assert weights[0] == 1.0
        assert weights[1] == 0.0

    def test_sums_to_one_on_forest(self):
        X, y = linearly_separable(300, seed=6)
        forest = RandomForest(n_trees=15, seed=0).fit(X, y)
        assert impurity_importance(forest).sum() == pytest.approx(1.0, abs=1e-12)

    def test_bagging_of_trees_supported(self):
        X, y = linearly_separable(200, seed=7)
        ensemble = fit_bagging(X, y, "tree", {"max_depth": 4}, m=3, seed=1)
        assert impurity_importance(ensemble).sum() == pytest.approx(1.0, abs=1e-12)

    def test_non_tree_model_rejected(self):
        from bothound.models import LogisticRegression

        X, y = linearly_separable(100, seed=8)
        model = LogisticRegression().fit(X, y)
        with pytest.raises(DataFormatError):
            impurity_importance(model)


class TestChiSquared:
    def test_feature_equals_label_statistic_is_n(self):
        y = np.array([0] * 30 + [1] * 20)
        stat, df = chi_squared(y.astype(float), y)
        assert stat == pytest.approx(len(y))
        assert df == 1

    def test_proportional_table_is_zero(self):
        # feature split half/half identically inside each class
        column = np.array([0.0, 1.0] * 20)
        labels = np.array([0] * 20 + [1] * 20)
        stat, df = chi_squared(column, labels)
        assert stat == pytest.approx(0.0, abs=1e-12)
        assert df == 1

    def test_independent_feature_below_critical_value(self):
        rng = np.random.default_rng(9)
        below = 0
        trials = 100
        for _ in range(trials):
            labels = rng.integers(0, 2, 400)
            column = rng.normal(size=400)  # same distribution for both classes
            stat, df = chi_squared(column, labels, bins=4)
            assert df in CHI2_CRIT_95
            if stat < CHI2_CRIT_95[df]:
                below += 1
        assert below >= 90

    def test_matches_scipy_contingency(self):
        rng = np.random.default_rng(10)
        labels = rng.integers(0, 2, 300)
        column = rng.normal(size=300) + labels * 0.8
        stat, df = chi_squared(column, labels, bins=4)
        qs = np.quantile(column, [0.25, 0.5, 0.75])
        bins = np.searchsorted(np.unique(qs), column, side="right")
        table = np.zeros((bins.max() + 1, 2))
        for b, l in zip(bins, labels):
            table[b, l] += 1
        expected_stat, _, expected_df, _ = scipy_stats.chi2_contingency(table, correction=False)
        assert stat == pytest.approx(expected_stat, rel=1e-12)
        assert df == expected_df

    def test_critical_values_match_scipy(self):
        for df, crit in CHI2_CRIT_95.items():
            assert crit == pytest.approx(scipy_stats.chi2.ppf(0.95, df), abs=5e-4)

    def test_constant_feature_zero_df(self):
        column = np.full(50, 3.3)
        labels = np.array([0, 1] * 25)
        assert chi_squared(column, labels) == (0.0, 0)

    def test_binary_feature_used_as_is(self):
        rng = np.random.default_rng(11)
        labels = rng.integers(0, 2, 200)
        column = (rng.random(200) < 0.3).astype(float)
        stat, df = chi_squared(column, labels)
        assert df == 1


class TestAsciiRoc:
    def test_sketch_contains_curve_and_diagonal(self):
        y = np.array([0, 0, 1, 1, 1, 0])
        points, _ = roc_auc(y, np.array([0.1, 0.4, 0.35, 0.8, 0.9, 0.05]))
        sketch = ascii_roc(points)
        assert "*" in sketch and "." in sketch and "fpr" in sketch
