"""Gauss-Laguerre rules for expectations over Gamma-distributed variables."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_laguerre(n, shape=1.0):
    """
    Nodes and weights for E[f(Z)], Z ~ Gamma(shape, 1).

    Golub-Welsch on the Jacobi matrix of the generalized Laguerre
    polynomials with parameter shape - 1. Weights are normalized to sum to
    one, so sum(w * f(x)) approximates the expectation directly.
    """
    a = shape - 1.0
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + a + 1.0
    off = np.sqrt(k[1:] * (k[1:] + a))
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(jac)
    weights = vecs[0] ** 2
    nodes.setflags(write=False)
    weights = weights / weights.sum()
    weights.setflags(write=False)
    return nodes, weights


def expect_gamma(f, shape=1.0, n=64):
    """Gauss-Laguerre approximation of E[f(Z)] for Z ~ Gamma(shape, 1)."""
    x, w = gauss_laguerre(n, float(shape))
    return float(np.dot(w, f(x)))
