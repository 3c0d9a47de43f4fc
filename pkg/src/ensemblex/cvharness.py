"""Splits, fold-wise held-out risks, and the all-methods comparison.

The harness never trains base learners: the score tensors it receives are
already held-out predictions (from files or the synthetic generator). A
V-fold split therefore just partitions units; the cross-validated risk of
a combination is the pooled mean loss over all held-out units, so fitting
on folds reduces exactly to fitting on their concatenation.
"""

from dataclasses import dataclass

import numpy as np

from .combiners import (
    avg_after_softmax,
    avg_before_softmax,
    boc_fit,
    boc_predict,
    discrete_sl_predict,
    discrete_sl_select,
    learner_risks,
    majority_vote,
)
from .core import SIMPLEX, LabelVector, ScoreTensor, softmax_tensor
from .errors import DimensionMismatchError, InvalidInputError
from .metrics import evaluate, evaluate_hard
from .superlearner import sl_fit, sl_predict

# Comparison rows, in reporting order. best_single is the learner that
# happens to score best on the test set, an empirical oracle reference.
COMPARE_METHODS = (
    "best_single",
    "super_learner",
    "discrete_sl_nll",
    "discrete_sl_error",
    "boc_before_softmax",
    "boc_after_softmax",
    "avg_before_softmax",
    "avg_after_softmax",
    "majority_vote",
)


@dataclass(frozen=True)
class SplitSpec:
    """Unit partition: V folds, or one validation part plus its complement.

    assignments[i] is the fold index of unit i (mode "vfold"), or 1 when
    unit i belongs to the validation part and 0 otherwise (mode "single").
    """

    mode: str  # "single" | "vfold"
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1 or len(a) < 1:
            raise InvalidInputError("assignments must be a non-empty 1-d array")
        if self.mode == "single":
            parts = 2
        elif self.mode == "vfold":
            parts = int(a.max()) + 1
            if parts < 2:
                raise InvalidInputError("vfold mode needs at least 2 folds")
        else:
            raise InvalidInputError(f"unknown split mode {self.mode!r}")
        counts = np.bincount(a, minlength=parts)
        if len(counts) > parts or counts.min() == 0:
            raise InvalidInputError("every part of a split must be non-empty")
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    @property
    def n_units(self):
        return len(self.assignments)

    @property
    def n_folds(self):
        return 1 if self.mode == "single" else int(self.assignments.max()) + 1

    def part_indices(self, part):
        return np.flatnonzero(self.assignments == part)

    def validation_indices(self):
        """Units where combiners are fit (part 1 in single mode)."""
        if self.mode != "single":
            raise InvalidInputError("validation part exists only in single mode")
        return self.part_indices(1)

    def holdout_indices(self):
        """The complement of the validation part in single mode."""
        if self.mode != "single":
            raise InvalidInputError("holdout part exists only in single mode")
        return self.part_indices(0)


def make_split(n, folds=1, *, seed=0, labels=None, val_fraction=0.5) -> SplitSpec:
    """Assign units to folds, deterministically in the seed.

    folds >= 2 builds a V-fold partition with fold sizes within one of
    each other; folds == 1 builds a single split whose validation part
    holds round(val_fraction * n) units. When labels are given, assignment
    is stratified: each class's units are dealt round-robin, which keeps
    class proportions stable in every part.
    """
    if folds < 1:
        raise InvalidInputError("folds must be >= 1")
    if folds == 1:
        n_val = int(round(val_fraction * n))
        if not 0 < n_val < n:
            raise InvalidInputError(
                f"single split of {n} units at fraction {val_fraction} "
                "leaves an empty part"
            )
    elif n < folds:
        raise InvalidInputError(f"cannot split {n} units into {folds} folds")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    if labels is not None:
        y = labels.labels if isinstance(labels, LabelVector) else np.asarray(labels)
        if len(y) != n:
            raise DimensionMismatchError(f"{len(y)} labels for {n} units")
        # Stable sort by label keeps the shuffled order within each class.
        order = order[np.argsort(y[order], kind="stable")]

    assignments = np.empty(n, dtype=np.int64)
    if folds == 1:
        # Deal a repeating pattern with one validation slot every n/n_val
        # positions, so stratified classes contribute proportionally.
        pattern = np.zeros(n, dtype=np.int64)
        pattern[np.linspace(0, n - 1, n_val).round().astype(np.int64)] = 1
        assignments[order] = pattern
    else:
        assignments[order] = np.arange(n) % folds
    return SplitSpec(mode="single" if folds == 1 else "vfold",
                     assignments=assignments, seed=seed)


@dataclass(frozen=True)
class FoldedScores:
    """Held-out (scores, labels) pairs, one per fold."""

    folds: tuple  # of (ScoreTensor, LabelVector)

    def __post_init__(self):
        folds = tuple(self.folds)
        if len(folds) < 1:
            raise InvalidInputError("at least one fold is required")
        m = folds[0][0].n_learners
        k = folds[0][0].n_classes
        for s, y in folds:
            if not isinstance(s, ScoreTensor) or not isinstance(y, LabelVector):
                raise InvalidInputError("folds must hold (ScoreTensor, LabelVector)")
            if s.n_learners != m:
                raise DimensionMismatchError("learner count differs across folds")
            if s.n_classes != k or y.n_classes != k:
                raise DimensionMismatchError("class count differs across folds")
            if s.n_units != len(y):
                raise DimensionMismatchError("fold scores and labels disagree on N")
        object.__setattr__(self, "folds", folds)

    @classmethod
    def single(cls, s: ScoreTensor, y: LabelVector):
        """The whole tensor as one held-out fold (single-split fitting)."""
        return cls(folds=((s, y),))

    @classmethod
    def from_split(cls, s: ScoreTensor, y: LabelVector, split: SplitSpec):
        """Slice a tensor by a split; single mode keeps the validation part."""
        if split.n_units != s.n_units:
            raise DimensionMismatchError(
                f"split covers {split.n_units} units, tensor has {s.n_units}"
            )
        if split.mode == "single":
            parts = [split.validation_indices()]
        else:
            parts = [split.part_indices(v) for v in range(split.n_folds)]
        return cls(folds=tuple(
            (ScoreTensor(s.values[idx]), LabelVector(y.labels[idx], y.n_classes))
            for idx in parts
        ))

    @property
    def n_folds(self):
        return len(self.folds)

    @property
    def n_learners(self):
        return self.folds[0][0].n_learners

    @property
    def n_classes(self):
        return self.folds[0][0].n_classes

    def concat(self):
        """All held-out units as one (ScoreTensor, LabelVector) pair."""
        if self.n_folds == 1:
            return self.folds[0]
        s = np.concatenate([f[0].values for f in self.folds], axis=0)
        y = np.concatenate([f[1].labels for f in self.folds])
        return ScoreTensor(s), LabelVector(y, self.n_classes)


def cv_learner_risk(folds: FoldedScores, j, loss="nll") -> float:
    """Pooled mean held-out loss of learner j across all folds."""
    if not 0 <= j < folds.n_learners:
        raise InvalidInputError(f"learner index {j} out of range")
    s, y = folds.concat()
    return float(learner_risks(s, y, loss)[j])


def cv_sl_fit(folds: FoldedScores, constraint=SIMPLEX, scale="score",
              config=None, learner_names=None):
    """Fit the weighted combination on the pooled held-out risk.

    The pooled mean over folds equals the mean over their concatenation,
    so this reduces to one fit on the concatenated data; with a single
    fold it is the single-split fit.
    """
    s, y = folds.concat()
    return sl_fit(s, y, constraint=constraint, scale=scale, config=config,
                  learner_names=learner_names)


def compare_all(folds: FoldedScores, test_scores: ScoreTensor,
                test_labels: LabelVector, constraint=SIMPLEX, config=None,
                learner_names=None):
    """Fit every method on the folds and evaluate each on the test set.

    Returns a dict method name -> EvalReport in COMPARE_METHODS order.
    best_single is chosen by test accuracy (the empirical oracle row), not
    by validation risk.
    """
    if test_scores.n_learners != folds.n_learners:
        raise DimensionMismatchError(
            f"test tensor has {test_scores.n_learners} learners, "
            f"folds have {folds.n_learners}"
        )
    if test_scores.n_classes != folds.n_classes:
        raise DimensionMismatchError("fit and test tensors disagree on K")
    val_s, val_y = folds.concat()
    names = tuple(learner_names) if learner_names is not None else None

    single_reports = [
        evaluate(softmax_tensor(test_scores.learner(j)), test_labels)
        for j in range(test_scores.n_learners)
    ]
    best = max(range(len(single_reports)),
               key=lambda j: (single_reports[j].accuracy, -j))

    sl = cv_sl_fit(folds, constraint=constraint, config=config,
                   learner_names=names)
    dsl_nll = discrete_sl_select(val_s, val_y, loss="nll", learner_names=names)
    dsl_err = discrete_sl_select(val_s, val_y, loss="error", learner_names=names)
    posterior = boc_fit(val_s, val_y)

    k = test_labels.n_classes
    reports = {
        "best_single": single_reports[best],
        "super_learner": evaluate(sl_predict(test_scores, sl), test_labels),
        "discrete_sl_nll": evaluate(
            discrete_sl_predict(test_scores, dsl_nll), test_labels),
        "discrete_sl_error": evaluate(
            discrete_sl_predict(test_scores, dsl_err), test_labels),
        "boc_before_softmax": evaluate(
            boc_predict(posterior, test_scores, "before_softmax"), test_labels),
        "boc_after_softmax": evaluate(
            boc_predict(posterior, test_scores, "after_softmax"), test_labels),
        "avg_before_softmax": evaluate(avg_before_softmax(test_scores), test_labels),
        "avg_after_softmax": evaluate(avg_after_softmax(test_scores), test_labels),
        "majority_vote": evaluate_hard(
            LabelVector(majority_vote(test_scores), k), test_labels),
    }
    return reports
