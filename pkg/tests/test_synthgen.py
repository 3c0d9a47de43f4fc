"""Synthetic score generator: determinism, learner kinds, label law."""

import numpy as np
import pytest
from scipy.special import ndtr

import ensemblex as ex
from ensemblex.errors import InvalidInputError
from ensemblex.synthgen import WEAK_NOISE_SD, learner_name


def gen(n, k, lib, seed, **kw):
    return ex.generate(ex.GenSpec(n, k, lib, seed=seed, **kw))


class TestDeterminism:
    def test_same_seed_reproduces_everything_bitwise(self):
        lib = (ex.BayesOracle(), ex.Noisy(1.0), ex.OverConfident(0.2),
               ex.Weak(0.5), ex.CorrelatedWith(1, 0.7))
        a = gen(50, 4, lib, seed=123)
        b = gen(50, 4, lib, seed=123)
        np.testing.assert_array_equal(a[0].values, b[0].values)
        np.testing.assert_array_equal(a[1].labels, b[1].labels)
        np.testing.assert_array_equal(a[2].values, b[2].values)

    def test_different_seeds_differ(self):
        lib = (ex.Noisy(1.0),)
        a = gen(20, 3, lib, seed=0)
        b = gen(20, 3, lib, seed=1)
        assert not np.array_equal(a[0].values, b[0].values)

    def test_shared_draws_are_stable_under_library_extension(self):
        # Adding a learner at the end must not disturb earlier learners.
        base = (ex.BayesOracle(), ex.Noisy(1.0))
        s2, y2, b2 = gen(40, 3, base, seed=5)
        s3, y3, b3 = gen(40, 3, base + (ex.Weak(0.5),), seed=5)
        np.testing.assert_array_equal(s3.values[:, :2], s2.values)
        np.testing.assert_array_equal(y3.labels, y2.labels)
        np.testing.assert_array_equal(b3.values, b2.values)

    def test_hard_and_soft_labels_share_scores(self):
        lib = (ex.BayesOracle(), ex.Noisy(0.5))
        soft = gen(30, 3, lib, seed=9)
        hard = gen(30, 3, lib, seed=9, hard_labels=True)
        np.testing.assert_array_equal(soft[0].values, hard[0].values)


class TestLearnerKinds:
    def test_oracle_scores_equal_bayes_scores(self):
        s, _, bayes = gen(25, 4, (ex.BayesOracle(),), seed=2)
        np.testing.assert_array_equal(s.values, bayes.values)

    def test_pure_overconfident_keeps_the_argmax(self):
        lib = (ex.BayesOracle(), ex.OverConfident(0.1))
        s, _, _ = gen(500, 5, lib, seed=3)
        np.testing.assert_array_equal(
            s.values[:, 0].argmax(axis=1), s.values[:, 1].argmax(axis=1)
        )

    def test_pure_overconfident_sharpens_probabilities(self):
        lib = (ex.BayesOracle(), ex.OverConfident(0.1))
        s, _, _ = gen(500, 5, lib, seed=3)
        p = ex.softmax_tensor(s).values
        assert np.all(p[:, 1].max(axis=1) >= p[:, 0].max(axis=1) - 1e-12)

    def test_noisy_overconfident_deviates_from_pure_sharpening(self):
        pure = (ex.BayesOracle(), ex.OverConfident(0.1))
        noisy = (ex.BayesOracle(), ex.OverConfident(0.1, noise_sd=2.0))
        sp, _, _ = gen(200, 4, pure, seed=4)
        sn, _, _ = gen(200, 4, noisy, seed=4)
        assert not np.array_equal(sp.values[:, 1], sn.values[:, 1])
        # The underlying shared draws are identical either way.
        np.testing.assert_array_equal(sp.values[:, 0], sn.values[:, 0])

    def test_fully_shrunk_weak_learner_guesses_at_chance(self):
        s, y, _ = gen(4000, 10, (ex.Weak(1.0),), seed=6)
        acc = ex.evaluate(ex.avg_after_softmax(s), y).accuracy
        assert abs(acc - 0.1) <= 3.0 * np.sqrt(0.1 * 0.9 / 4000)

    def test_weak_learner_interpolates_signal(self):
        accs = []
        for shrink in (0.0, 0.6, 1.0):
            s, y, _ = gen(6000, 3, (ex.Weak(shrink),), seed=8)
            accs.append(ex.evaluate(ex.avg_after_softmax(s), y).accuracy)
        assert accs[0] > accs[1] > accs[2]

    def test_correlated_with_full_mix_duplicates_base(self):
        lib = (ex.Noisy(1.0), ex.CorrelatedWith(0, 1.0))
        s, _, _ = gen(60, 3, lib, seed=10)
        np.testing.assert_array_equal(s.values[:, 0], s.values[:, 1])

    def test_correlated_mix_interpolates_toward_base(self):
        corr = []
        for mix in (0.1, 0.9):
            lib = (ex.Noisy(1.0), ex.CorrelatedWith(0, mix))
            s, _, _ = gen(800, 3, lib, seed=11)
            a = s.values[:, 0].ravel()
            b = s.values[:, 1].ravel()
            corr.append(np.corrcoef(a, b)[0, 1])
        assert corr[1] > corr[0]

    def test_weak_noise_floor_is_fixed(self):
        # The chance-level learner's score spread comes from the shared
        # noise floor, not from the (removed) signal.
        s, _, _ = gen(8000, 2, (ex.Weak(1.0),), seed=12)
        assert abs(s.values.std() - WEAK_NOISE_SD) <= 0.1


class TestLabels:
    def test_hard_labels_follow_the_bayes_argmax(self):
        s, y, bayes = gen(300, 4, (ex.Noisy(1.0),), seed=13, hard_labels=True)
        np.testing.assert_array_equal(y.labels, bayes.values[:, 0].argmax(axis=1))
        assert ex.empirical_bayes_rate(bayes, y) == 1.0

    def test_soft_label_agreement_matches_posterior_mass(self):
        n = 20000
        _, y, bayes = gen(n, 2, (ex.BayesOracle(),), seed=14)
        rate = ex.empirical_bayes_rate(bayes, y)
        p_max = ex.softmax_tensor(bayes).values[:, 0].max(axis=1).mean()
        assert abs(rate - p_max) <= 3.0 * np.sqrt(p_max * (1 - p_max) / n) + 1e-3

    def test_two_class_rate_matches_gaussian_geometry(self):
        # Two unit-separated Gaussian classes: the Bayes rate is
        # Phi(class_sep / sqrt(2)).
        n = 20000
        sep = 2.5
        _, y, bayes = gen(n, 2, (ex.BayesOracle(),), seed=15, class_sep=sep)
        expected = float(ndtr(sep / np.sqrt(2.0)))
        rate = ex.empirical_bayes_rate(bayes, y)
        assert abs(rate - expected) <= 3.0 * np.sqrt(expected * (1 - expected) / n)

    def test_wider_separation_raises_the_bayes_rate(self):
        rates = []
        for sep in (0.5, 2.0, 4.0):
            _, y, bayes = gen(5000, 3, (ex.BayesOracle(),), seed=16, class_sep=sep)
            rates.append(ex.empirical_bayes_rate(bayes, y))
        assert rates[0] < rates[1] < rates[2]

    def test_all_classes_appear(self):
        _, y, _ = gen(5000, 6, (ex.BayesOracle(),), seed=17)
        assert set(np.unique(y.labels)) == set(range(6))


class TestValidation:
    def test_rejects_bad_dimensions(self):
        with pytest.raises(InvalidInputError):
            ex.GenSpec(0, 3, (ex.BayesOracle(),), seed=0)
        with pytest.raises(InvalidInputError):
            ex.GenSpec(10, 1, (ex.BayesOracle(),), seed=0)
        with pytest.raises(InvalidInputError):
            ex.GenSpec(10, 3, (), seed=0)
        with pytest.raises(InvalidInputError):
            ex.GenSpec(10, 3, (ex.BayesOracle(),), seed=0, class_sep=0.0)

    def test_rejects_bad_learner_parameters(self):
        with pytest.raises(InvalidInputError):
            ex.Noisy(-0.5)
        with pytest.raises(InvalidInputError):
            ex.OverConfident(1.5)
        with pytest.raises(InvalidInputError):
            ex.OverConfident(0.5, noise_sd=-1.0)
        with pytest.raises(InvalidInputError):
            ex.Weak(1.2)
        with pytest.raises(InvalidInputError):
            ex.CorrelatedWith(-1, 0.5)
        with pytest.raises(InvalidInputError):
            ex.CorrelatedWith(0, 1.5)

    def test_rejects_forward_correlation_reference(self):
        with pytest.raises(InvalidInputError):
            ex.GenSpec(10, 3, (ex.CorrelatedWith(0, 0.5), ex.Noisy(1.0)), seed=0)
        with pytest.raises(InvalidInputError):
            ex.GenSpec(10, 3, (ex.Noisy(1.0), ex.CorrelatedWith(1, 0.5)), seed=0)


def test_learner_names_encode_position_and_kind():
    spec = ex.GenSpec(5, 2, (ex.BayesOracle(), ex.Weak(0.5)), seed=0)
    assert learner_name(0, spec.learners[0]) == "learner_0_bayes_oracle"
    assert learner_name(1, spec.learners[1]) == "learner_1_weak"
