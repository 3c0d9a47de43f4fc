"""Synthetic score tensors with a known Bayes-optimal predictor.

Latent model: each unit draws a class uniformly, then a feature vector from
a Gaussian centered at class_sep times that class's unit vector (shared
identity covariance). The true log class-posterior is then affine in the
features, so the exact Bayes scores are available in closed form as

    b_ik = class_sep * x_ik    (up to a per-unit shift)

and every learner derives its scores from these Bayes scores according to
its kind. Labels are redrawn from the true posterior given the features
(or set to the posterior argmax when hard_labels is on), which keeps the
Bayes rate an asymptotic upper bound for every combiner.
"""

from dataclasses import dataclass

import numpy as np

from .core import LabelVector, ScoreTensor
from .errors import InvalidInputError

# Noise amplitude of the weak-learner regime, comparable to the default
# class separation; the shrink parameter moves the signal toward zero
# against this fixed noise floor, so a fully shrunk learner is confidently
# wrong rather than merely uncertain.
WEAK_NOISE_SD = 2.5

DEFAULT_CLASS_SEP = 2.5


@dataclass(frozen=True)
class BayesOracle:
    """Scores equal to the exact Bayes scores."""

    kind = "bayes_oracle"


@dataclass(frozen=True)
class Noisy:
    """Bayes scores plus iid Gaussian noise."""

    noise_sd: float
    kind = "noisy"

    def __post_init__(self):
        if not np.isfinite(self.noise_sd) or self.noise_sd < 0:
            raise InvalidInputError("noise_sd must be >= 0")


@dataclass(frozen=True)
class OverConfident:
    """Scores divided by a temperature in (0, 1), sharpening the softmax.

    With noise_sd = 0 the argmax per unit is identical to the Bayes
    oracle's; a positive noise_sd degrades the signal before sharpening,
    giving a learner that is both weaker and over-confident.
    """

    temperature: float
    noise_sd: float = 0.0
    kind = "over_confident"

    def __post_init__(self):
        if not 0 < self.temperature < 1:
            raise InvalidInputError("temperature must lie in (0, 1)")
        if not np.isfinite(self.noise_sd) or self.noise_sd < 0:
            raise InvalidInputError("noise_sd must be >= 0")


@dataclass(frozen=True)
class Weak:
    """Signal shrunk toward zero against a fixed unit noise floor.

    signal_shrink = 1 leaves pure noise; 0 leaves the full signal (plus
    the noise floor).
    """

    signal_shrink: float
    kind = "weak"

    def __post_init__(self):
        if not 0 <= self.signal_shrink <= 1:
            raise InvalidInputError("signal_shrink must lie in [0, 1]")


@dataclass(frozen=True)
class CorrelatedWith:
    """Convex mix of an earlier learner's scores with fresh unit noise.

    mix = 1 duplicates the base learner exactly. The base index must refer
    to a learner that appears earlier in the library.
    """

    base: int
    mix: float
    kind = "correlated_with"

    def __post_init__(self):
        if self.base < 0:
            raise InvalidInputError("base learner index must be >= 0")
        if not 0 <= self.mix <= 1:
            raise InvalidInputError("mix must lie in [0, 1]")


LEARNER_KINDS = (BayesOracle, Noisy, OverConfident, Weak, CorrelatedWith)


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one synthetic dataset."""

    n_units: int
    n_classes: int
    learners: tuple
    seed: int
    class_sep: float = DEFAULT_CLASS_SEP
    hard_labels: bool = False

    def __post_init__(self):
        if self.n_units < 1:
            raise InvalidInputError("n_units must be >= 1")
        if self.n_classes < 2:
            raise InvalidInputError("n_classes must be >= 2")
        if not np.isfinite(self.class_sep) or self.class_sep <= 0:
            raise InvalidInputError("class_sep must be positive")
        learners = tuple(self.learners)
        if len(learners) < 1:
            raise InvalidInputError("at least one learner is required")
        for j, spec in enumerate(learners):
            if not isinstance(spec, LEARNER_KINDS):
                raise InvalidInputError(f"unknown learner spec {spec!r}")
            if isinstance(spec, CorrelatedWith) and spec.base >= j:
                raise InvalidInputError(
                    f"learner {j} mixes with learner {spec.base}, "
                    "which must come earlier in the library"
                )
        object.__setattr__(self, "learners", learners)

    @property
    def n_learners(self):
        return len(self.learners)


def learner_name(j, spec):
    """Default manifest name for learner j."""
    return f"learner_{j}_{spec.kind}"


def generate(spec: GenSpec):
    """Draw one dataset. Returns (scores, labels, bayes_scores with M=1).

    Deterministic given the seed: the generator consumes draws in a fixed
    order (features, labels, then one noise block per learner in library
    order), so two runs of the same spec are bitwise identical.
    """
    rng = np.random.default_rng(spec.seed)
    n, k, sep = spec.n_units, spec.n_classes, spec.class_sep

    latent = rng.integers(0, k, size=n)
    x = rng.standard_normal((n, k))
    x[np.arange(n), latent] += sep
    bayes = sep * x

    if spec.hard_labels:
        labels = bayes.argmax(axis=1)
        rng.random(n)  # keep the draw order identical across label modes
    else:
        shifted = np.exp(bayes - bayes.max(axis=1, keepdims=True))
        posterior = shifted / shifted.sum(axis=1, keepdims=True)
        u = rng.random(n)
        labels = (posterior.cumsum(axis=1) < u[:, None]).sum(axis=1)
        labels = np.minimum(labels, k - 1)

    scores = np.empty((n, spec.n_learners, k))
    for j, learner in enumerate(spec.learners):
        if isinstance(learner, BayesOracle):
            scores[:, j, :] = bayes
        elif isinstance(learner, Noisy):
            scores[:, j, :] = bayes + learner.noise_sd * rng.standard_normal((n, k))
        elif isinstance(learner, OverConfident):
            noised = bayes + learner.noise_sd * rng.standard_normal((n, k))
            scores[:, j, :] = noised / learner.temperature
        elif isinstance(learner, Weak):
            noise = WEAK_NOISE_SD * rng.standard_normal((n, k))
            scores[:, j, :] = (1.0 - learner.signal_shrink) * bayes + noise
        else:
            fresh = rng.standard_normal((n, k))
            scores[:, j, :] = (
                learner.mix * scores[:, learner.base, :]
                + (1.0 - learner.mix) * fresh
            )

    return (
        ScoreTensor(scores),
        LabelVector(labels, k),
        ScoreTensor(bayes[:, None, :]),
    )


def empirical_bayes_rate(bayes_scores: ScoreTensor, labels: LabelVector) -> float:
    """Accuracy of the exact Bayes predictor on this draw.

    No combiner's expected accuracy exceeds this asymptotically, so it is
    the reference ceiling in comparisons.
    """
    if bayes_scores.n_learners != 1:
        raise InvalidInputError("bayes scores must have exactly one learner")
    if bayes_scores.n_units != len(labels):
        raise InvalidInputError("scores and labels disagree on N")
    picks = bayes_scores.values[:, 0, :].argmax(axis=1)
    return float((picks == labels.labels).mean())
