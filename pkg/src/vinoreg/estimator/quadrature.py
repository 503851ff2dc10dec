"""Gauss-Hermite rules for the weight function exp(-x**2)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal


def _orthonormal_hermite(x: np.ndarray, n: int) -> np.ndarray:
    """Values p_0..p_{n} at x of the Hermite polynomials orthonormal under exp(-x^2)/sqrt(pi)."""
    p = np.zeros((n + 1,) + x.shape)
    p[0] = 1.0
    if n >= 1:
        p[1] = np.sqrt(2.0) * x
    for k in range(1, n):
        p[k + 1] = (np.sqrt(2.0) * x * p[k] - np.sqrt(k) * p[k - 1]) / np.sqrt(k + 1.0)
    return p


@lru_cache(maxsize=None)
def _rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([0.0]), np.array([np.sqrt(np.pi)])
    # Golub-Welsch: eigenvalues of the symmetric Jacobi matrix
    off = np.sqrt(np.arange(1, n) / 2.0)
    x = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    # polish the nodes with Newton on p_n, then take Christoffel weights;
    # eigenvector-based weights lose relative accuracy in the tails
    for _ in range(3):
        p = _orthonormal_hermite(x, n)
        dp = np.sqrt(2.0 * n) * p[n - 1]
        x = x - p[n] / dp
    x = 0.5 * (x - x[::-1])
    p = _orthonormal_hermite(x, n - 1)
    w = np.sqrt(np.pi) / np.sum(p**2, axis=0)
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Hermite rule.

    Exact for polynomials of degree up to ``2n - 1`` against ``exp(-x**2)``.
    """
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= 100:
        raise ValueError(f"number of nodes must be an integer in 1..100, got {n!r}")
    x, w = _rule(int(n))
    return x.copy(), w.copy()
