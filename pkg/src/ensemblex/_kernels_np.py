"""Pure-numpy implementations of the hot numeric kernels.

Same signatures as ``_kernels_nb``; selected via the ENSEMBLEX_BACKEND
environment variable (see ``kernels``).
"""

import numpy as np


def softmax2d(x):
    """Row-wise stable softmax of a 2-d array."""
    m = x.max(axis=1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=1, keepdims=True)


def logsumexp2d(x):
    """Row-wise log(sum(exp(x))) of a 2-d array, overflow-free."""
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


def combine_scores(scores, weights):
    """Weighted sum over the learner axis: (N, M, K), (M,) -> (N, K)."""
    return np.einsum("imk,m->ik", scores, weights)


def stacked_nll(scores, labels, weights):
    """Mean NLL of softmax(sum_j w_j * scores[:, j, :]) at the true labels."""
    z = combine_scores(scores, weights)
    zy = z[np.arange(len(labels)), labels]
    return float((logsumexp2d(z) - zy).mean())


def stacked_nll_grad(scores, labels, weights):
    """Mean NLL and its gradient in the weights.

    d/dw_j = mean_i [ sum_k q_ik s_ijk - s_ij,y_i ] with q = softmax of the
    combined scores.
    """
    n = len(labels)
    idx = np.arange(n)
    z = combine_scores(scores, weights)
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    s = e.sum(axis=1)
    risk = float((m[:, 0] + np.log(s) - z[idx, labels]).mean())
    q = e / s[:, None]
    grad = (np.einsum("ik,imk->m", q, scores) - scores[idx, :, labels].sum(axis=0)) / n
    return risk, grad
