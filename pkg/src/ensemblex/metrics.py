"""Evaluation of predictions against labels.

Accuracy is defined through the confusion matrix (trace over total) so the
two never disagree; cross-entropy is reported in nats, the same base used
by the fitting objective.
"""

from dataclasses import dataclass

import numpy as np

from .core import PROB_FLOOR, LabelVector, ProbTensor
from .errors import DimensionMismatchError, InvalidInputError


@dataclass(frozen=True)
class EvalReport:
    """Accuracy, cross-entropy, per-class breakdown, confusion counts.

    mean_cross_entropy is None for hard (label-only) predictions.
    per_class_accuracy holds NaN for classes absent from the labels.
    confusion is indexed [true class, predicted class].
    """

    accuracy: float
    mean_cross_entropy: float | None
    per_class_accuracy: np.ndarray
    confusion: np.ndarray
    n: int

    def __post_init__(self):
        c = np.asarray(self.confusion, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InvalidInputError("confusion matrix must be square")
        if int(c.sum()) != self.n:
            raise InvalidInputError("confusion counts must sum to n")
        if self.accuracy != np.trace(c) / self.n:
            raise InvalidInputError("accuracy must equal trace(confusion)/n")
        p = np.asarray(self.per_class_accuracy, dtype=np.float64)
        if p.shape != (c.shape[0],):
            raise InvalidInputError("per-class accuracy must have length K")
        c.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "confusion", c)
        object.__setattr__(self, "per_class_accuracy", p)

    @property
    def n_classes(self):
        return self.confusion.shape[0]


def _confusion(preds, labels, k):
    c = np.zeros((k, k), dtype=np.int64)
    np.add.at(c, (labels, preds), 1)
    return c


def _report(preds, labels, k, mean_ce):
    n = len(labels)
    confusion = _confusion(preds, labels, k)
    row_totals = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        per_class = np.where(
            row_totals > 0, np.diag(confusion) / np.maximum(row_totals, 1), np.nan
        )
    return EvalReport(
        accuracy=float(np.trace(confusion) / n),
        mean_cross_entropy=mean_ce,
        per_class_accuracy=per_class,
        confusion=confusion,
        n=n,
    )


def _as_prob_matrix(probs):
    if isinstance(probs, ProbTensor):
        if probs.n_learners != 1:
            raise InvalidInputError("evaluate expects a single prediction per unit")
        return probs.values[:, 0, :]
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2:
        raise InvalidInputError("expected an N x K probability matrix")
    if not np.all(np.isfinite(p)) or p.min() < 0.0:
        raise InvalidInputError("probabilities must be finite and non-negative")
    if np.abs(p.sum(axis=1) - 1.0).max() > 1e-6:
        raise InvalidInputError("probability rows must sum to 1")
    return p


def evaluate(probs, labels: LabelVector) -> EvalReport:
    """Score probabilistic predictions: accuracy, NLL, confusion.

    Predictions pick the argmax class (lowest index on ties); the
    cross-entropy term floors probabilities at PROB_FLOOR before the log.
    """
    p = _as_prob_matrix(probs)
    if p.shape[0] != len(labels):
        raise DimensionMismatchError(f"{p.shape[0]} rows for {len(labels)} labels")
    if p.shape[1] != labels.n_classes:
        raise DimensionMismatchError(
            f"{p.shape[1]} columns but labels declare {labels.n_classes} classes"
        )
    preds = p.argmax(axis=1)
    py = p[np.arange(len(labels)), labels.labels]
    mean_ce = float(-np.log(np.maximum(py, PROB_FLOOR)).mean())
    return _report(preds, labels.labels, labels.n_classes, mean_ce)


def evaluate_hard(preds: LabelVector, labels: LabelVector) -> EvalReport:
    """Score label predictions; cross-entropy is not applicable."""
    if len(preds) != len(labels):
        raise DimensionMismatchError(
            f"{len(preds)} predictions for {len(labels)} labels"
        )
    if preds.n_classes != labels.n_classes:
        raise DimensionMismatchError("predictions and labels disagree on K")
    return _report(preds.labels, labels.labels, labels.n_classes, None)
