"""Ensemble combination over base-learner score tensors.

Fits and evaluates unweighted averaging (before or after softmax),
majority voting, posterior-weighted combination, discrete selection, and
weighted combinations constrained to the simplex or an L1 ball, all on
held-out score tensors from any source.
"""

from .combiners import (
    BocPosterior,
    avg_after_softmax,
    avg_before_softmax,
    boc_ensemble,
    boc_fit,
    boc_predict,
    discrete_sl_predict,
    discrete_sl_select,
    learner_risks,
    majority_vote,
    vote_shares,
)
from .core import (
    PROB_FLOOR,
    SIMPLEX,
    UNCONSTRAINED,
    Constraint,
    FitInfo,
    FittedEnsemble,
    LabelVector,
    ProbTensor,
    ScoreTensor,
    WeightVector,
    argmax_class,
    l1_ball,
    log_sum_exp,
    softmax_tensor,
    softmax_unit,
)
from .cvharness import (
    COMPARE_METHODS,
    FoldedScores,
    SplitSpec,
    compare_all,
    cv_learner_risk,
    cv_sl_fit,
    make_split,
)
from .metrics import EvalReport, evaluate, evaluate_hard
from .superlearner import (
    SolverConfig,
    project_l1_ball,
    project_simplex,
    sl_fit,
    sl_gradient,
    sl_predict,
    sl_risk,
    sl_risk_binary_logit,
)
from .synthgen import (
    BayesOracle,
    CorrelatedWith,
    GenSpec,
    Noisy,
    OverConfident,
    Weak,
    empirical_bayes_rate,
    generate,
)

__version__ = "0.1.0"

__all__ = [
    "BayesOracle",
    "BocPosterior",
    "COMPARE_METHODS",
    "Constraint",
    "CorrelatedWith",
    "EvalReport",
    "FitInfo",
    "FittedEnsemble",
    "FoldedScores",
    "GenSpec",
    "LabelVector",
    "Noisy",
    "OverConfident",
    "PROB_FLOOR",
    "ProbTensor",
    "SIMPLEX",
    "ScoreTensor",
    "SolverConfig",
    "SplitSpec",
    "UNCONSTRAINED",
    "Weak",
    "WeightVector",
    "argmax_class",
    "avg_after_softmax",
    "avg_before_softmax",
    "boc_ensemble",
    "boc_fit",
    "boc_predict",
    "compare_all",
    "cv_learner_risk",
    "cv_sl_fit",
    "discrete_sl_predict",
    "discrete_sl_select",
    "empirical_bayes_rate",
    "evaluate",
    "evaluate_hard",
    "generate",
    "l1_ball",
    "learner_risks",
    "log_sum_exp",
    "majority_vote",
    "make_split",
    "project_l1_ball",
    "project_simplex",
    "sl_fit",
    "sl_gradient",
    "sl_predict",
    "sl_risk",
    "sl_risk_binary_logit",
    "softmax_tensor",
    "softmax_unit",
    "vote_shares",
]
