"""Numba-compiled hot kernels, mirroring ``_kernels_np``.

Loops are kept sequential so results never depend on a parallel schedule;
``cache=True`` amortizes compilation across processes. Importing this module
requires numba.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def softmax2d(x):
    out = np.empty_like(x)
    r, k = x.shape
    for i in range(r):
        m = x[i, 0]
        for c in range(1, k):
            if x[i, c] > m:
                m = x[i, c]
        s = 0.0
        for c in range(k):
            out[i, c] = np.exp(x[i, c] - m)
            s += out[i, c]
        for c in range(k):
            out[i, c] /= s
    return out


@njit(cache=True)
def logsumexp2d(x):
    r, k = x.shape
    out = np.empty(r)
    for i in range(r):
        m = x[i, 0]
        for c in range(1, k):
            if x[i, c] > m:
                m = x[i, c]
        s = 0.0
        for c in range(k):
            s += np.exp(x[i, c] - m)
        out[i] = m + np.log(s)
    return out


@njit(cache=True)
def combine_scores(scores, weights):
    n, m, k = scores.shape
    out = np.zeros((n, k))
    for i in range(n):
        for j in range(m):
            w = weights[j]
            for c in range(k):
                out[i, c] += w * scores[i, j, c]
    return out


@njit(cache=True)
def stacked_nll(scores, labels, weights):
    n, m, k = scores.shape
    z = np.empty(k)
    total = 0.0
    for i in range(n):
        for c in range(k):
            acc = 0.0
            for j in range(m):
                acc += weights[j] * scores[i, j, c]
            z[c] = acc
        zmax = z[0]
        for c in range(1, k):
            if z[c] > zmax:
                zmax = z[c]
        s = 0.0
        for c in range(k):
            s += np.exp(z[c] - zmax)
        total += zmax + np.log(s) - z[labels[i]]
    return total / n


@njit(cache=True)
def stacked_nll_grad(scores, labels, weights):
    n, m, k = scores.shape
    z = np.empty(k)
    q = np.empty(k)
    grad = np.zeros(m)
    total = 0.0
    for i in range(n):
        for c in range(k):
            acc = 0.0
            for j in range(m):
                acc += weights[j] * scores[i, j, c]
            z[c] = acc
        zmax = z[0]
        for c in range(1, k):
            if z[c] > zmax:
                zmax = z[c]
        s = 0.0
        for c in range(k):
            q[c] = np.exp(z[c] - zmax)
            s += q[c]
        total += zmax + np.log(s) - z[labels[i]]
        for c in range(k):
            q[c] /= s
        for j in range(m):
            acc = 0.0
            for c in range(k):
                acc += q[c] * scores[i, j, c]
            grad[j] += acc - scores[i, j, labels[i]]
    return total / n, grad / n
