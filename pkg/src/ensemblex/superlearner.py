"""Weighted score combination fit by projected gradient descent.

The objective is the mean negative log-likelihood of the labels under the
softmax of the weighted score combination z_i = sum_j a_j s_ij:

    R(a) = (1/N) sum_i [ lse(z_i) - z_i[y_i] ]

which is convex in a (composition of log-sum-exp with a linear map), so
projected gradient descent with backtracking converges to the constrained
minimum. Feasible sets are the probability simplex or an L1 ball.

Binary logit-scale stacking is handled by rewriting it as score-scale
stacking on a transformed tensor: with per-learner class-1 logits L_ij,
the two-column tensor [0, L_ij] has softmax class-1 probability
sigmoid(sum_j a_j L_ij), which is exactly the logit-stacked model, so the
same solver and kernels apply unchanged.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    METHOD_SUPER_LEARNER,
    PROB_FLOOR,
    SIMPLEX,
    Constraint,
    FitInfo,
    FittedEnsemble,
    LabelVector,
    ScoreTensor,
    WeightVector,
    softmax_tensor,
)
from .errors import DimensionMismatchError, InvalidInputError, UnsupportedScaleError

SL_SCALES = ("score", "logit")

# Largest magnitude a transformed logit can take: logit of a probability
# clipped to [PROB_FLOOR, 1 - PROB_FLOOR].
LOGIT_CLIP = float(np.log((1.0 - PROB_FLOOR) / PROB_FLOOR))


@dataclass(frozen=True)
class SolverConfig:
    """Projected-gradient settings: Armijo backtracking line search."""

    max_iters: int = 10000
    init_step: float = 1.0
    backtrack: float = 0.5
    sufficient_decrease: float = 1e-4
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not 0 < self.backtrack < 1:
            raise InvalidInputError("backtrack factor must lie in (0, 1)")
        if self.init_step <= 0 or self.sufficient_decrease <= 0 or self.rel_tol < 0:
            raise InvalidInputError("steps and tolerances must be positive")


def project_simplex(v):
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold rule: find the largest prefix whose shifted values
    stay positive, subtract the corresponding threshold, clip at zero.
    Already-feasible points are returned unchanged so projection is exact
    on its own output.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or len(v) == 0:
        raise InvalidInputError("projection expects a non-empty 1-d vector")
    if np.all(v >= 0.0) and abs(v.sum() - 1.0) <= 1e-12:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    return w / w.sum()


def project_l1_ball(v, bound):
    """Euclidean projection onto {w : ||w||_1 <= bound}.

    Interior points are returned unchanged; boundary cases reduce to a
    simplex projection of the magnitudes with the signs restored.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or len(v) == 0:
        raise InvalidInputError("projection expects a non-empty 1-d vector")
    if bound <= 0 or not np.isfinite(bound):
        raise InvalidInputError("l1 bound must be positive and finite")
    a = np.abs(v)
    if a.sum() <= bound:
        return v.copy()
    w = project_simplex(a / bound) * bound
    return np.sign(v) * w


def _project(v, constraint: Constraint):
    if constraint.kind == "simplex":
        return project_simplex(v)
    if constraint.kind == "l1":
        return project_l1_ball(v, constraint.bound)
    return np.asarray(v, dtype=np.float64).copy()


def sl_risk(s: ScoreTensor, y: LabelVector, weights) -> float:
    """Mean NLL of the labels under the weighted score combination."""
    w = np.asarray(weights, dtype=np.float64)
    _check_fit_inputs(s, y, w)
    return kernels.stacked_nll(s.values, y.labels, w)


def sl_gradient(s: ScoreTensor, y: LabelVector, weights) -> np.ndarray:
    """Analytic gradient of sl_risk in the weights.

    dR/da_j = (1/N) sum_i [ sum_k q_ik s_ijk - s_ij[y_i] ]   with
    q_i = softmax(z_i).
    """
    w = np.asarray(weights, dtype=np.float64)
    _check_fit_inputs(s, y, w)
    _, grad = kernels.stacked_nll_grad(s.values, y.labels, w)
    return grad


def _check_fit_inputs(s: ScoreTensor, y: LabelVector, w: np.ndarray):
    if len(y) != s.n_units:
        raise DimensionMismatchError(f"{s.n_units} units but {len(y)} labels")
    if y.n_classes != s.n_classes:
        raise DimensionMismatchError(
            f"tensor has {s.n_classes} classes but labels declare {y.n_classes}"
        )
    if w.ndim != 1 or len(w) != s.n_learners:
        raise DimensionMismatchError(
            f"{w.shape} weights for {s.n_learners} learners"
        )


def sl_risk_binary_logit(s: ScoreTensor, y: LabelVector, weights) -> float:
    """Mean Bernoulli NLL of the weighted logit combination (K = 2 only).

    Each learner contributes the log-odds of its softmax class-1
    probability; the combined log-odds pass through the logistic function
    and the labels are scored with the Bernoulli likelihood. Logits are
    clipped to +-LOGIT_CLIP, the image of the probability floor.
    """
    if s.n_classes != 2:
        raise UnsupportedScaleError(
            f"logit risk requires exactly 2 classes, got {s.n_classes}"
        )
    w = np.asarray(weights, dtype=np.float64)
    _check_fit_inputs(s, y, w)
    p1 = softmax_tensor(s).values[:, :, 1]
    p1 = np.clip(p1, PROB_FLOOR, 1.0 - PROB_FLOOR)
    logits = np.clip(np.log(p1) - np.log1p(-p1), -LOGIT_CLIP, LOGIT_CLIP)
    z = logits @ w
    # -log sigmoid(z) = logaddexp(0, -z); the two label cases fold into
    # logaddexp(0, z) - y*z.
    return float((np.logaddexp(0.0, z) - y.labels * z).mean())


def logit_transform(s: ScoreTensor) -> ScoreTensor:
    """Rewrite a binary tensor so score stacking equals logit stacking.

    Column 0 becomes identically zero and column 1 carries the clipped
    class-1 logit of each learner's softmax output.
    """
    if s.n_classes != 2:
        raise UnsupportedScaleError(
            f"logit scale requires exactly 2 classes, got {s.n_classes}"
        )
    p1 = softmax_tensor(s).values[:, :, 1]
    p1 = np.clip(p1, PROB_FLOOR, 1.0 - PROB_FLOOR)
    logits = np.log(p1) - np.log1p(-p1)
    out = np.zeros((s.n_units, s.n_learners, 2))
    out[:, :, 1] = logits
    return ScoreTensor(out)


def pgd_minimize(s: ScoreTensor, y: LabelVector, constraint: Constraint,
                 config: SolverConfig | None = None):
    """Projected gradient descent with Armijo backtracking.

    Starts from uniform weights (projected into the feasible set), takes
    projected steps w+ = P(w - t g), and accepts the first step length
    satisfying the sufficient-decrease condition

        R(w+) <= R(w) - c * ||w+ - w||^2 / t.

    The first iteration tries init_step; later iterations resume from
    twice the last accepted step, capped at init_step, so a badly scaled
    objective does not pay the full backtracking ladder every iteration.
    Stops when the accepted relative decrease falls below rel_tol or the
    projected point stops moving. Returns (weights, FitInfo).
    """
    cfg = config if config is not None else SolverConfig()
    m = s.n_learners
    w = _project(np.full(m, 1.0 / m), constraint)
    risk, grad = kernels.stacked_nll_grad(s.values, y.labels, w)
    trace = [risk]
    converged = False
    iters = 0
    next_step = cfg.init_step
    for iters in range(1, cfg.max_iters + 1):
        step = next_step
        accepted = None
        while step > 1e-20:
            cand = _project(w - step * grad, constraint)
            move = cand - w
            sq = float(move @ move)
            if sq == 0.0:
                break
            cand_risk = kernels.stacked_nll(s.values, y.labels, cand)
            if cand_risk <= risk - cfg.sufficient_decrease * sq / step:
                accepted = (cand, cand_risk)
                break
            step *= cfg.backtrack
        if accepted is None:
            converged = True
            break
        new_w, new_risk = accepted
        drop = risk - new_risk
        w = new_w
        risk, grad = kernels.stacked_nll_grad(s.values, y.labels, w)
        trace.append(risk)
        next_step = min(step / cfg.backtrack, cfg.init_step)
        if drop <= cfg.rel_tol * max(1.0, abs(risk)):
            converged = True
            break
    info = FitInfo(loss_trace=np.array(trace), n_iters=iters, converged=converged)
    return w, info


def sl_fit(s: ScoreTensor, y: LabelVector, constraint: Constraint = SIMPLEX,
           scale="score", config: SolverConfig | None = None,
           learner_names=None) -> FittedEnsemble:
    """Fit combination weights by constrained NLL minimization."""
    if scale not in SL_SCALES:
        raise UnsupportedScaleError(f"scale must be one of {SL_SCALES}, got {scale!r}")
    fit_on = logit_transform(s) if scale == "logit" else s
    w, info = pgd_minimize(fit_on, y, constraint, config)
    return FittedEnsemble(
        method=METHOD_SUPER_LEARNER,
        weights=WeightVector(w, constraint),
        scale=scale,
        learner_names=tuple(learner_names) if learner_names is not None else None,
        n_classes=s.n_classes,
        fit_info=info,
    )


def sl_predict(s: ScoreTensor, fitted: FittedEnsemble) -> np.ndarray:
    """Softmax of the weighted combination. Returns N x K probabilities."""
    if fitted.method != METHOD_SUPER_LEARNER:
        raise InvalidInputError(f"expected a super_learner fit, got {fitted.method!r}")
    w = fitted.weights.weights
    if len(w) != s.n_learners:
        raise DimensionMismatchError(f"{len(w)} weights for {s.n_learners} learners")
    use = logit_transform(s) if fitted.scale == "logit" else s
    return kernels.softmax2d(kernels.combine_scores(use.values, w))
