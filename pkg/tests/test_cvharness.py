"""Splitting, pooled risks, cross-validated fits, and the comparison table."""

import numpy as np
import pytest

import ensemblex as ex
from ensemblex.combiners import learner_nll
from ensemblex.cvharness import COMPARE_METHODS, FoldedScores
from ensemblex.errors import DimensionMismatchError, InvalidInputError


def synth(n, k, lib, seed, **kw):
    s, y, _ = ex.generate(ex.GenSpec(n, k, lib, seed=seed, **kw))
    return s, y


class TestMakeSplit:
    def test_is_deterministic_in_the_seed(self):
        a = ex.make_split(40, 4, seed=7)
        b = ex.make_split(40, 4, seed=7)
        c = ex.make_split(40, 4, seed=8)
        np.testing.assert_array_equal(a.assignments, b.assignments)
        assert not np.array_equal(a.assignments, c.assignments)

    def test_vfold_partition_sizes_are_balanced(self):
        split = ex.make_split(10, 3, seed=1)
        sizes = sorted(len(split.part_indices(k)) for k in range(3))
        assert sizes == [3, 3, 4]
        all_idx = np.sort(np.concatenate([split.part_indices(k) for k in range(3)]))
        np.testing.assert_array_equal(all_idx, np.arange(10))

    def test_single_split_honors_val_fraction(self):
        split = ex.make_split(20, 1, seed=0, val_fraction=0.25)
        assert split.mode == "single"
        assert len(split.validation_indices()) == 5
        assert len(split.holdout_indices()) == 15

    def test_stratification_balances_classes(self):
        y = np.repeat(np.arange(4), 25)
        split = ex.make_split(100, 5, seed=3, labels=y)
        for k in range(5):
            counts = np.bincount(y[split.part_indices(k)], minlength=4)
            assert counts.max() - counts.min() <= 1

    def test_stratified_single_split_keeps_proportions(self):
        y = np.array([0] * 30 + [1] * 10)
        split = ex.make_split(40, 1, seed=2, labels=y, val_fraction=0.5)
        val_counts = np.bincount(y[split.validation_indices()], minlength=2)
        np.testing.assert_array_equal(val_counts, [15, 5])

    def test_rejects_degenerate_requests(self):
        with pytest.raises(InvalidInputError):
            ex.make_split(5, 0)
        with pytest.raises(InvalidInputError):
            ex.make_split(3, 4)
        with pytest.raises(InvalidInputError):
            ex.make_split(10, 1, val_fraction=0.0)
        with pytest.raises(DimensionMismatchError):
            ex.make_split(10, 2, labels=np.zeros(4, dtype=np.int64))


class TestFoldedScores:
    def test_from_split_partitions_the_data(self):
        s, y = synth(30, 3, (ex.BayesOracle(), ex.Noisy(1.0)), 4)
        split = ex.make_split(30, 3, seed=1, labels=y)
        folds = FoldedScores.from_split(s, y, split)
        assert folds.n_folds == 3
        total = sum(fs.n_units for fs, _ in folds.folds)
        assert total == 30
        cat_s, cat_y = folds.concat()
        assert cat_s.n_units == 30
        assert np.bincount(cat_y.labels, minlength=3).sum() == 30

    def test_single_wraps_whole_dataset(self):
        s, y = synth(12, 3, (ex.Noisy(1.0),), 5)
        folds = FoldedScores.single(s, y)
        assert folds.n_folds == 1
        np.testing.assert_array_equal(folds.folds[0][0].values, s.values)

    def test_rejects_inconsistent_folds(self):
        s1, y1 = synth(10, 3, (ex.Noisy(1.0),), 6)
        s2, y2 = synth(10, 3, (ex.Noisy(1.0), ex.BayesOracle()), 6)
        with pytest.raises(DimensionMismatchError):
            FoldedScores(folds=((s1, y1), (s2, y2)))


class TestPooledRisks:
    def test_single_fold_matches_direct_learner_risk(self):
        s, y = synth(50, 3, (ex.BayesOracle(), ex.Noisy(1.0)), 7)
        folds = FoldedScores.single(s, y)
        direct = learner_nll(s, y)
        for j in range(2):
            assert abs(ex.cv_learner_risk(folds, j) - direct[j]) <= 1e-12

    def test_pooled_mean_weights_units_equally(self):
        s, y = synth(40, 3, (ex.Noisy(1.0),), 8)
        split = ex.make_split(40, 4, seed=2, labels=y)
        folds = FoldedScores.from_split(s, y, split)
        pooled = ex.cv_learner_risk(folds, 0)
        cat = folds.concat()
        assert abs(pooled - learner_nll(*cat)[0]) <= 1e-12

    def test_error_loss_counts_mistakes(self):
        s, y = synth(200, 4, (ex.BayesOracle(),), 9, hard_labels=True)
        folds = FoldedScores.single(s, y)
        assert ex.cv_learner_risk(folds, 0, loss="error") == 0.0


class TestCvSlFit:
    def test_equals_fit_on_concatenation(self):
        s, y = synth(90, 3, (ex.BayesOracle(), ex.Noisy(1.0), ex.Weak(0.5)), 10)
        split = ex.make_split(90, 3, seed=3, labels=y)
        folds = FoldedScores.from_split(s, y, split)
        via_cv = ex.cv_sl_fit(folds)
        direct = ex.sl_fit(*folds.concat())
        np.testing.assert_array_equal(
            via_cv.weights.weights, direct.weights.weights
        )

    def test_fold_order_is_irrelevant(self):
        s, y = synth(60, 3, (ex.BayesOracle(), ex.Noisy(1.0)), 11)
        split = ex.make_split(60, 3, seed=4, labels=y)
        folds = FoldedScores.from_split(s, y, split)
        rolled = FoldedScores(folds=folds.folds[1:] + folds.folds[:1])
        w1 = ex.cv_sl_fit(folds).weights.weights
        w2 = ex.cv_sl_fit(rolled).weights.weights
        np.testing.assert_allclose(w1, w2, rtol=0, atol=1e-12)

    def test_duplicated_fold_changes_nothing(self):
        s, y = synth(50, 3, (ex.BayesOracle(), ex.Noisy(1.0)), 12)
        one = FoldedScores.single(s, y)
        two = FoldedScores(folds=((s, y), (s, y)))
        np.testing.assert_allclose(
            ex.cv_sl_fit(one).weights.weights,
            ex.cv_sl_fit(two).weights.weights,
            rtol=0,
            atol=1e-12,
        )


@pytest.fixture(scope="module")
def comparison():
    lib = (ex.BayesOracle(), ex.Noisy(1.5), ex.Weak(0.8))
    s, y = synth(600, 3, lib, 13)
    st_, yt = synth(1500, 3, lib, 14)
    folds = FoldedScores.single(s, y)
    return ex.compare_all(folds, st_, yt), (s, y, st_, yt)


class TestCompareAll:

    def test_reports_every_method(self, comparison):
        table, _ = comparison
        assert set(table) == set(COMPARE_METHODS)
        for rep in table.values():
            assert 0.0 <= rep.accuracy <= 1.0
            assert rep.n == 1500

    def test_best_single_is_the_test_accuracy_maximum(self, comparison):
        table, (_, _, st_, yt) = comparison
        per_learner = [
            ex.evaluate(ex.softmax_tensor(st_.learner(j)), yt).accuracy
            for j in range(st_.n_learners)
        ]
        assert table["best_single"].accuracy == max(per_learner)

    def test_weighted_fit_validation_risk_beats_every_learner(self, comparison):
        _, (s, y, _, _) = comparison
        fit = ex.sl_fit(s, y)
        assert fit.fit_info.loss_trace[-1] <= learner_nll(s, y).min() + 1e-9

    def test_single_learner_library_collapses_the_table(self):
        s, y = synth(120, 3, (ex.Noisy(1.0),), 15)
        st_, yt = synth(300, 3, (ex.Noisy(1.0),), 16)
        table = ex.compare_all(FoldedScores.single(s, y), st_, yt)
        accs = {round(rep.accuracy, 15) for rep in table.values()}
        assert len(accs) == 1

    def test_is_deterministic(self):
        lib = (ex.BayesOracle(), ex.Noisy(1.0))
        s, y = synth(100, 3, lib, 17)
        st_, yt = synth(200, 3, lib, 18)
        t1 = ex.compare_all(FoldedScores.single(s, y), st_, yt)
        t2 = ex.compare_all(FoldedScores.single(s, y), st_, yt)
        for m in COMPARE_METHODS:
            assert t1[m].accuracy == t2[m].accuracy
            if t1[m].mean_cross_entropy is not None:
                assert t1[m].mean_cross_entropy == t2[m].mean_cross_entropy

    def test_no_method_beats_the_bayes_rate_by_chance(self):
        lib = (ex.BayesOracle(), ex.Noisy(1.0), ex.OverConfident(0.2))
        s, y, _ = ex.generate(ex.GenSpec(800, 4, lib, seed=19))
        st_, yt, bt = ex.generate(ex.GenSpec(4000, 4, lib, seed=20))
        rate = ex.empirical_bayes_rate(bt, yt)
        table = ex.compare_all(FoldedScores.single(s, y), st_, yt)
        margin = 3.0 * np.sqrt(rate * (1 - rate) / 4000)
        for rep in table.values():
            assert rep.accuracy <= rate + margin
