"""Proximal and spectral operators.

All functions are pure and operate on dense float arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidInput

RANK_RTOL = 1e-12


class SvdFactors(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T

    def rank(self) -> int:
        if self.s.size == 0 or self.s[0] == 0:
            return 0
        return int(np.count_nonzero(self.s > RANK_RTOL * self.s[0]))


def _check_finite(M, what="input"):
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{what} contains non-finite entries")
    return M


def svd(M) -> SvdFactors:
    """Exact economy SVD, singular values sorted descending.

    Uses the divide-and-conquer driver and retries with ``gesvd`` when it
    fails to converge, which happens on some badly scaled inputs.
    """
    M = _check_finite(M)
    if M.shape[0] < M.shape[1]:
        # LAPACK is noticeably faster on tall inputs.
        u, s, v = svd(M.T)
        return SvdFactors(v, s, u)
    try:
        u, s, vt = scipy.linalg.svd(M, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError:
        u, s, vt = scipy.linalg.svd(M, full_matrices=False, lapack_driver="gesvd",
                                    check_finite=False)
    return SvdFactors(u, s, vt.T)


def trace_norm(M) -> float:
    """Sum of singular values (nuclear norm)."""
    M = _check_finite(M)
    if M.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(M, check_finite=False).sum())


def correlation_regularizer(X, alpha) -> float:
    """Trace Lasso ``||X Diag(alpha)||_*``.

    Equals ``||alpha||_1`` for orthonormal columns and ``||alpha||_2`` when
    all columns are the same unit vector; in general it lies between the two
    for unit-norm columns.
    """
    X = np.asarray(X, dtype=float)
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[1] != alpha.shape[0]:
        raise DimensionMismatch(
            f"X has {X.shape[-1] if X.ndim else 0} columns but alpha has {alpha.shape[0]} entries")
    return trace_norm(X * alpha)


def svt(M, tau: float) -> np.ndarray:
    """Singular value thresholding, the prox of ``tau * ||.||_*``."""
    M = _check_finite(M)
    if tau < 0:
        raise InvalidInput("threshold must be non-negative")
    if not np.any(M):
        return np.zeros_like(M)
    if tau == 0:
        return M.copy()
    u, s, v = svd(M)
    keep = s > tau
    if not np.any(keep):
        return np.zeros_like(M)
    return (u[:, keep] * (s[keep] - tau)) @ v[:, keep].T


def soft_threshold(v, tau: float) -> np.ndarray:
    """Elementwise shrinkage, the prox of ``tau * ||.||_1``."""
    v = _check_finite(v)
    if tau < 0:
        raise InvalidInput("threshold must be non-negative")
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)
