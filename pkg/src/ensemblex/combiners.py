"""Fixed and fitted combination rules over a score tensor.

Covers the unweighted rules (score averaging before or after softmax,
majority voting), the Bayes-style posterior weighting over learners, and the
discrete selector that picks the single best learner by validation risk.
The weighted simplex/L1 combiner lives in :mod:`ensemblex.superlearner`.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    METHOD_BOC,
    METHOD_DISCRETE_SL,
    PROB_FLOOR,
    SUM_TOL,
    FittedEnsemble,
    LabelVector,
    ScoreTensor,
    WeightVector,
    softmax_tensor,
)
from .errors import DimensionMismatchError, InvalidInputError, UnsupportedScaleError

BOC_SCALES = ("before_softmax", "after_softmax")


@dataclass(frozen=True)
class BocPosterior:
    """Posterior over learners given validation data, under a uniform prior."""

    log_likelihoods: np.ndarray
    posterior_weights: np.ndarray

    def __post_init__(self):
        ll = np.asarray(self.log_likelihoods, dtype=np.float64)
        w = np.asarray(self.posterior_weights, dtype=np.float64)
        if ll.ndim != 1 or len(ll) < 1 or w.shape != ll.shape:
            raise InvalidInputError("posterior needs matching 1-d arrays")
        if w.min() < 0.0 or abs(w.sum() - 1.0) > SUM_TOL:
            raise InvalidInputError("posterior weights must be a distribution")
        for a, name in ((ll, "log_likelihoods"), (w, "posterior_weights")):
            b = np.ascontiguousarray(a)
            b.setflags(write=False)
            object.__setattr__(self, name, b)

    @property
    def n_learners(self):
        return len(self.posterior_weights)


def _check_pair(s: ScoreTensor, y: LabelVector):
    if len(y) != s.n_units:
        raise DimensionMismatchError(
            f"{s.n_units} units but {len(y)} labels"
        )
    if y.n_classes != s.n_classes:
        raise DimensionMismatchError(
            f"tensor has {s.n_classes} classes but labels declare {y.n_classes}"
        )


def avg_before_softmax(s: ScoreTensor) -> np.ndarray:
    """Mean of raw scores across learners, then softmax. Returns N x K probs."""
    mean_scores = s.values.mean(axis=1)
    return kernels.softmax2d(mean_scores)


def avg_after_softmax(s: ScoreTensor) -> np.ndarray:
    """Softmax each learner first, then average the probabilities."""
    return softmax_tensor(s).values.mean(axis=1)


def vote_shares(s: ScoreTensor) -> np.ndarray:
    """Fraction of learners whose top class is k, per unit. Rows sum to 1.

    Each learner casts one vote for its argmax class (lowest index on
    within-learner ties).
    """
    n, m, k = s.values.shape
    picks = s.values.argmax(axis=2)
    shares = np.zeros((n, k))
    np.add.at(shares, (np.arange(n)[:, None], picks), 1.0)
    return shares / m


def majority_vote(s: ScoreTensor) -> np.ndarray:
    """Plurality vote over learner argmaxes; ties go to the lowest class index."""
    return vote_shares(s).argmax(axis=1).astype(np.int64)


def predict_from_probs(probs: np.ndarray) -> np.ndarray:
    """Argmax class per row, lowest index on ties."""
    p = np.asarray(probs)
    if p.ndim != 2:
        raise InvalidInputError("expected an N x K probability matrix")
    return p.argmax(axis=1).astype(np.int64)


def learner_log_likelihoods(s: ScoreTensor, y: LabelVector) -> np.ndarray:
    """Per-learner log-likelihood of the labels under softmaxed scores.

    Probabilities are floored at PROB_FLOOR before the log so a single
    over-confident miss cannot send a learner's likelihood to -inf.
    """
    _check_pair(s, y)
    probs = softmax_tensor(s).values
    py = probs[np.arange(s.n_units), :, y.labels]
    return np.log(np.maximum(py, PROB_FLOOR)).sum(axis=0)


def boc_fit(s: ScoreTensor, y: LabelVector) -> BocPosterior:
    """Posterior probability that each learner is the best model of the data.

    Under a uniform prior over learners the posterior is the softmax of the
    per-learner label log-likelihoods (the prior folds out). The posterior
    does not depend on the combination scale; the scale is chosen when
    predictions are combined.
    """
    ll = learner_log_likelihoods(s, y)
    shifted = np.exp(ll - ll.max())
    return BocPosterior(ll, shifted / shifted.sum())


def boc_ensemble(posterior: BocPosterior, scale="after_softmax",
                 learner_names=None, n_classes=None) -> FittedEnsemble:
    """Package a posterior as a fitted method with a fixed combination scale."""
    return FittedEnsemble(
        method=METHOD_BOC,
        weights=WeightVector(posterior.posterior_weights),
        scale=scale,
        learner_names=tuple(learner_names) if learner_names is not None else None,
        n_classes=n_classes,
    )


def boc_combine(s: ScoreTensor, weights: np.ndarray, scale: str) -> np.ndarray:
    """Posterior-weighted combination of learner outputs. Returns N x K probs."""
    if scale not in BOC_SCALES:
        raise UnsupportedScaleError(
            f"scale must be one of {BOC_SCALES}, got {scale!r}"
        )
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != s.n_learners:
        raise DimensionMismatchError(
            f"{len(w)} weights for {s.n_learners} learners"
        )
    if scale == "before_softmax":
        return kernels.softmax2d(kernels.combine_scores(s.values, w))
    return np.einsum("imk,m->ik", softmax_tensor(s).values, w)


def boc_predict(posterior, s: ScoreTensor, scale) -> np.ndarray:
    """Combine learner outputs with posterior weights on the given scale."""
    if isinstance(posterior, FittedEnsemble):
        if posterior.method != METHOD_BOC:
            raise InvalidInputError(f"expected a boc fit, got {posterior.method!r}")
        w = posterior.weights.weights
    elif isinstance(posterior, BocPosterior):
        w = posterior.posterior_weights
    else:
        w = np.asarray(posterior, dtype=np.float64)
    return boc_combine(s, w, scale)


def learner_nll(s: ScoreTensor, y: LabelVector) -> np.ndarray:
    """Mean negative log-likelihood per learner (cross-entropy)."""
    return -learner_log_likelihoods(s, y) / s.n_units


def learner_error(s: ScoreTensor, y: LabelVector) -> np.ndarray:
    """Misclassification rate per learner under argmax prediction."""
    _check_pair(s, y)
    picks = s.values.argmax(axis=2)
    return (picks != y.labels[:, None]).mean(axis=0)


def learner_risks(s: ScoreTensor, y: LabelVector, loss: str) -> np.ndarray:
    if loss == "nll":
        return learner_nll(s, y)
    if loss == "error":
        return learner_error(s, y)
    raise InvalidInputError(f"loss must be 'nll' or 'error', got {loss!r}")


def discrete_sl_select(
    s: ScoreTensor, y: LabelVector, loss="nll", learner_names=None
) -> FittedEnsemble:
    """Pick the single learner with the lowest validation risk.

    Ties break toward the lowest learner index.
    """
    risks = learner_risks(s, y, loss)
    return FittedEnsemble(
        method=METHOD_DISCRETE_SL,
        selected_learner=int(np.argmin(risks)),
        loss=loss,
        learner_names=tuple(learner_names) if learner_names is not None else None,
        n_classes=s.n_classes,
    )


def discrete_sl_predict(s: ScoreTensor, fitted: FittedEnsemble) -> np.ndarray:
    """Softmax probabilities of the selected learner. Returns N x K."""
    if fitted.method != METHOD_DISCRETE_SL:
        raise InvalidInputError(f"expected a discrete_sl fit, got {fitted.method!r}")
    j = fitted.selected_learner
    if not 0 <= j < s.n_learners:
        raise DimensionMismatchError(
            f"selected learner {j} out of range for {s.n_learners} learners"
        )
    return kernels.softmax2d(s.values[:, j, :])
