import numpy as np
import pytest

from bothound.errors import DataFormatError
from bothound.models import DecisionTree, RandomForest, gini
from bothound.synth import linearly_separable


class TestGini:
    def test_three_bots_one_human(self):
        assert gini(np.array([1, 3])) == pytest.approx(0.375)

    def test_pure_node_zero(self):
        assert gini(np.array([0, 4])) == 0.0
        assert gini(np.array([4, 0])) == 0.0

    def test_balanced_is_half(self):
        assert gini(np.array([5, 5])) == pytest.approx(0.5)


class TestDecisionTree:
    def test_pure_class_single_leaf(self):
        X = np.random.default_rng(0).normal(size=(20, 3))
        y = np.ones(20, dtype=int)
        tree = DecisionTree().fit(X, y)
        assert tree.n_nodes == 1
        assert (tree.predict(X) == y).all()

    def test_1d_separable_depth_one(self):
        X = np.array([[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        tree = DecisionTree().fit(X, y)
        assert tree.n_nodes == 3  # root + two leaves
        assert -1.0 < tree.threshold[0] < 1.0
        assert tree.threshold[0] == pytest.approx(0.0)
        assert (tree.predict(X) == y).all()

    def test_separable_2d_perfect_train_accuracy(self):
        X, y = linearly_separable(400, seed=1)
        tree = DecisionTree().fit(X, y)
        assert (tree.predict(X) == y).mean() == 1.0

    def test_max_depth_zero_is_single_leaf(self):
        X, y = linearly_separable(50, seed=2)
        tree = DecisionTree(max_depth=0).fit(X, y)
        assert tree.n_nodes == 1

    def test_min_samples_leaf_respected(self):
        X, y = linearly_separable(100, seed=3)
        tree = DecisionTree(min_samples_leaf=10).fit(X, y)
        leaves = tree.counts[tree.feature == -1]
        assert (leaves.sum(axis=1) >= 10).all()

    def test_deterministic_tie_break_lowest_feature(self):
        # two identical columns: the split must use feature 0
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([0, 0, 1, 1])
        tree = DecisionTree().fit(X, y)
        assert tree.feature[0] == 0

    def test_leaf_probability_is_class_fraction(self):
        X = np.array([[0.0], [0.0], [0.0], [0.0]])
        y = np.array([1, 1, 1, 0])
        tree = DecisionTree().fit(X, y)  # unsplittable: constant feature
        assert tree.n_nodes == 1
        assert tree.predict_proba(np.array([[0.0]]))[0] == pytest.approx(0.75)

    def test_empty_input_rejected(self):
        with pytest.raises(DataFormatError):
            DecisionTree().fit(np.empty((0, 2)), np.empty(0))

    def test_serialization_roundtrip(self):
        X, y = linearly_separable(120, seed=4)
        tree = DecisionTree(max_depth=6).fit(X, y)
        clone = DecisionTree.from_dict(tree.to_dict())
        probe, _ = linearly_separable(60, seed=5)
        assert np.array_equal(tree.predict_proba(probe), clone.predict_proba(probe))

    def test_nested_doc_shape(self):
        X = np.array([[-1.0], [1.0]])
        y = np.array([0, 1])
        doc = DecisionTree().fit(X, y).to_dict()
        root = doc["root"]
        assert set(root) == {"class_counts", "feature_index", "threshold", "left", "right"}
        assert root["left"]["class_counts"] == [1, 0]
        assert root["right"]["class_counts"] == [0, 1]

    def test_impurity_decrease_concentrates_on_informative_feature(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(300, 4))
        y = (X[:, 2] > 0).astype(int)
        tree = DecisionTree(max_depth=4).fit(X, y)
        decrease = tree.impurity_decrease()
        assert decrease.argmax() == 2


class TestRandomForest:
    def test_degenerate_forest_equals_tree(self):
        X, y = linearly_separable(200, seed=7)
        forest = RandomForest(n_trees=1, max_features=None, bootstrap=False, seed=0).fit(X, y)
        tree = DecisionTree().fit(X, y)
        probe, _ = linearly_separable(80, seed=8)
        assert np.array_equal(forest.predict_proba(probe), tree.predict_proba(probe))

    def test_same_seed_same_predictions(self):
        X, y = linearly_separable(150, seed=9)
        probe, _ = linearly_separable(50, seed=10)
        a = RandomForest(n_trees=11, seed=3).fit(X, y).predict_proba(probe)
        b = RandomForest(n_trees=11, seed=3).fit(X, y).predict_proba(probe)
        assert np.array_equal(a, b)

    def test_different_seed_differs(self):
        X, y = linearly_separable(150, seed=9)
        probe, _ = linearly_separable(50, seed=10)
        a = RandomForest(n_trees=5, max_depth=3, seed=1).fit(X, y).predict_proba(probe)
        b = RandomForest(n_trees=5, max_depth=3, seed=2).fit(X, y).predict_proba(probe)
        assert not np.array_equal(a, b)

    def test_forest_at_least_as_good_as_single_tree_on_train(self):
        X, y = linearly_separable(300, seed=11, gap=0.0)
        noisy = y.copy()
        flip = np.random.default_rng(12).choice(len(y), size=30, replace=False)
        noisy[flip] = 1 - noisy[flip]
        forest_acc = (RandomForest(n_trees=51, seed=0).fit(X, noisy).predict(X) == noisy).mean()
        tree_acc = (DecisionTree(max_depth=2).fit(X, noisy).predict(X) == noisy).mean()
        assert forest_acc >= tree_acc

    def test_serialization_roundtrip(self):
        X, y = linearly_separable(100, seed=13)
        forest = RandomForest(n_trees=7, max_depth=4, seed=5).fit(X, y)
        clone = RandomForest.from_dict(forest.to_dict())
        probe, _ = linearly_separable(40, seed=14)
        assert np.array_equal(forest.predict_proba(probe), clone.predict_proba(probe))

    def test_impurity_decrease_averages_members(self):
        X, y = linearly_separable(200, seed=15)
        forest = RandomForest(n_trees=9, seed=1).fit(X, y)
        manual = np.mean([t.impurity_decrease() for t in forest.trees], axis=0)
        assert np.allclose(forest.impurity_decrease(), manual)
