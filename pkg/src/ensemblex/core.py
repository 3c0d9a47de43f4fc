"""Domain types and the numeric primitives shared by every combiner.

The universal currency is the score tensor: raw, pre-softmax outputs of M
base learners on N units over K classes. All types are immutable after
construction (backing arrays are marked read-only) and all operations are
pure functions, so values can be shared freely across threads.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError, UnsupportedScaleError

# Floor applied to probabilities before any logarithm; over-confident
# learners legitimately produce numerically-zero probabilities.
PROB_FLOOR = 1e-12

# Tolerance on "sums to one" invariants.
SUM_TOL = 1e-9


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScoreTensor:
    """Raw base-learner outputs, indexed (unit i, learner j, class k)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3:
            raise InvalidInputError(f"score tensor must be 3-d, got shape {v.shape}")
        n, m, k = v.shape
        if n < 1 or m < 1 or k < 2:
            raise InvalidInputError(
                f"score tensor needs N>=1, M>=1, K>=2, got {n}x{m}x{k}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("score tensor contains non-finite values")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_units(self):
        return self.values.shape[0]

    @property
    def n_learners(self):
        return self.values.shape[1]

    @property
    def n_classes(self):
        return self.values.shape[2]

    def learner(self, j):
        """Single-learner view as an M=1 tensor."""
        if not 0 <= j < self.n_learners:
            raise InvalidInputError(f"learner index {j} out of range")
        return ScoreTensor(self.values[:, j : j + 1, :])


@dataclass(frozen=True)
class ProbTensor:
    """Probabilities with the same N x M x K indexing; rows sum to one."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3:
            raise InvalidInputError(f"prob tensor must be 3-d, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1 or v.shape[2] < 2:
            raise InvalidInputError(f"prob tensor dims too small: {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("prob tensor contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0 + 1e-12:
            raise InvalidInputError("prob tensor entries must lie in [0, 1]")
        sums = v.sum(axis=2)
        if np.abs(sums - 1.0).max() > SUM_TOL:
            raise InvalidInputError("prob tensor rows must sum to 1")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_units(self):
        return self.values.shape[0]

    @property
    def n_learners(self):
        return self.values.shape[1]

    @property
    def n_classes(self):
        return self.values.shape[2]


@dataclass(frozen=True)
class LabelVector:
    """Ground-truth (or predicted) class indices for N units."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        y = np.asarray(self.labels)
        if y.ndim != 1 or len(y) < 1:
            raise InvalidInputError("labels must be a non-empty 1-d array")
        if not np.issubdtype(y.dtype, np.integer):
            yf = np.asarray(y, dtype=np.float64)
            if not np.all(yf == np.floor(yf)):
                raise InvalidInputError("labels must be integers")
        y = y.astype(np.int64)
        k = int(self.n_classes)
        if k < 2:
            raise InvalidInputError(f"n_classes must be >= 2, got {k}")
        if y.min() < 0 or y.max() >= k:
            raise InvalidInputError(f"labels must lie in [0, {k})")
        object.__setattr__(self, "labels", _readonly(y))
        object.__setattr__(self, "n_classes", k)

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class Constraint:
    """Feasible set for combination weights."""

    kind: str  # "simplex" | "l1" | "unconstrained"
    bound: float | None = None

    def __post_init__(self):
        if self.kind not in ("simplex", "l1", "unconstrained"):
            raise InvalidInputError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "l1":
            if self.bound is None or not np.isfinite(self.bound) or self.bound <= 0:
                raise InvalidInputError("l1 constraint needs a positive finite bound")
            object.__setattr__(self, "bound", float(self.bound))
        elif self.bound is not None:
            raise InvalidInputError(f"{self.kind} constraint takes no bound")


SIMPLEX = Constraint("simplex")
UNCONSTRAINED = Constraint("unconstrained")

# The oracle guarantee needs a bounded loss, hence a bounded weight set; the
# default radius is a convention, generous enough to rescale score magnitudes.
DEFAULT_L1_BOUND = 5.0


def l1_ball(bound=DEFAULT_L1_BOUND):
    return Constraint("l1", bound)


@dataclass(frozen=True)
class WeightVector:
    """Combination coefficients plus the constraint they satisfy."""

    weights: np.ndarray
    constraint: Constraint = SIMPLEX

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or len(w) < 1:
            raise InvalidInputError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        c = self.constraint
        if c.kind == "simplex":
            if w.min() < 0.0:
                raise InvalidInputError("simplex weights must be non-negative")
            if abs(w.sum() - 1.0) > SUM_TOL:
                raise InvalidInputError("simplex weights must sum to 1")
        elif c.kind == "l1":
            if np.abs(w).sum() > c.bound + SUM_TOL:
                raise InvalidInputError(f"weights exceed the L1 bound {c.bound}")
        object.__setattr__(self, "weights", _readonly(w))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class FitInfo:
    """Solver trace: objective values per accepted iterate."""

    loss_trace: np.ndarray
    n_iters: int
    converged: bool

    def __post_init__(self):
        t = np.asarray(self.loss_trace, dtype=np.float64)
        if t.ndim != 1 or len(t) < 1:
            raise InvalidInputError("loss trace must be non-empty")
        object.__setattr__(self, "loss_trace", _readonly(t))

    @property
    def final_loss(self):
        return float(self.loss_trace[-1])


METHOD_SUPER_LEARNER = "super_learner"
METHOD_DISCRETE_SL = "discrete_sl"
METHOD_BOC = "boc"
METHOD_AVG_BEFORE = "avg_before_softmax"
METHOD_AVG_AFTER = "avg_after_softmax"
METHOD_MAJORITY_VOTE = "majority_vote"

METHODS = (
    METHOD_SUPER_LEARNER,
    METHOD_DISCRETE_SL,
    METHOD_BOC,
    METHOD_AVG_BEFORE,
    METHOD_AVG_AFTER,
    METHOD_MAJORITY_VOTE,
)

_WEIGHTED_METHODS = (METHOD_SUPER_LEARNER, METHOD_BOC)


@dataclass(frozen=True)
class FittedEnsemble:
    """A fitted combination rule, ready to predict.

    Which fields are populated depends on the method: weighted methods carry
    ``weights``, the discrete selector carries ``selected_learner``, and the
    unweighted rules carry neither.
    """

    method: str
    weights: WeightVector | None = None
    selected_learner: int | None = None
    scale: str | None = None  # boc: before/after softmax; super_learner: score/logit
    loss: str | None = None  # discrete_sl: nll/error
    learner_names: tuple[str, ...] | None = None
    n_classes: int | None = None
    fit_info: FitInfo | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}")
        if self.method in _WEIGHTED_METHODS:
            if self.weights is None:
                raise InvalidInputError(f"{self.method} requires weights")
            if self.selected_learner is not None:
                raise InvalidInputError(f"{self.method} takes no selected learner")
        elif self.method == METHOD_DISCRETE_SL:
            if self.selected_learner is None or self.weights is not None:
                raise InvalidInputError(
                    "discrete_sl carries a selected learner and no weights"
                )
            if self.loss not in ("nll", "error"):
                raise InvalidInputError("discrete_sl loss must be 'nll' or 'error'")
        else:
            if self.weights is not None or self.selected_learner is not None:
                raise InvalidInputError(f"{self.method} carries no fitted parameters")
        if self.method == METHOD_BOC and self.scale not in (
            "before_softmax",
            "after_softmax",
        ):
            raise UnsupportedScaleError(
                "boc scale must be before_softmax/after_softmax"
            )
        if self.method == METHOD_SUPER_LEARNER and self.scale not in ("score", "logit"):
            raise UnsupportedScaleError("super_learner scale must be 'score' or 'logit'")
        if self.learner_names is not None:
            object.__setattr__(self, "learner_names", tuple(self.learner_names))


def softmax_unit(scores):
    """Stable softmax of one score vector.

    Shift invariant: adding a constant to every class score leaves the
    output unchanged (up to rounding), since the row maximum is subtracted
    before exponentiation.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or len(s) == 0:
        raise InvalidInputError("softmax_unit expects a non-empty 1-d array")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("softmax_unit input must be finite")
    e = np.exp(s - s.max())
    return e / e.sum()


def softmax_tensor(s: ScoreTensor) -> ProbTensor:
    """Softmax applied independently per (unit, learner) row."""
    n, m, k = s.values.shape
    flat = kernels.softmax2d(s.values.reshape(n * m, k))
    return ProbTensor(flat.reshape(n, m, k))


def log_sum_exp(xs):
    """log(sum(exp(xs))) without overflow."""
    x = np.asarray(xs, dtype=np.float64)
    if x.ndim != 1 or len(x) == 0:
        raise InvalidInputError("log_sum_exp expects a non-empty 1-d array")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("log_sum_exp input must be finite")
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


def argmax_class(values):
    """Index of the maximum, ties broken toward the lowest index."""
    v = np.asarray(values)
    if v.ndim != 1 or len(v) == 0:
        raise InvalidInputError("argmax_class expects a non-empty 1-d array")
    return int(np.argmax(v))


def clip_probs(p):
    """Apply the probability floor used before every logarithm."""
    return np.maximum(p, PROB_FLOOR)
