"""Alternating direction solver for trace-Lasso coding with l1 loss.

Solves::

    min_alpha  ||y - X alpha||_1 + lam * ||X Diag(alpha)||_*

through the split problem ``y = X alpha + e``, ``J = X Diag(alpha)`` and
inexact augmented-Lagrangian updates with a growing penalty ``mu``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NumericalDivergence, SingularGram
from .prox import correlation_regularizer, soft_threshold, svt
from .types import CodingResult, SolverOptions, as_query

log = logging.getLogger(__name__)


class GramInverse:
    """Cholesky-factored ``X^T X + Diag(diag(X^T X))``.

    Applying :meth:`apply` multiplies by the inverse ``A`` without forming
    it.  Build one per dictionary and share it across queries; it is never
    mutated after construction.
    """

    def __init__(self, X):
        X = np.asarray(X, dtype=float)
        G = X.T @ X
        G[np.diag_indices_from(G)] *= 2.0
        try:
            self._cho = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SingularGram(f"Gram matrix is not positive definite: {exc}") from None
        d = np.diag(self._cho[0])
        if not np.all(np.isfinite(d)) or d.min() <= 1e-12 * max(d.max(), 1.0):
            raise SingularGram("Gram matrix is numerically singular")
        self.n = G.shape[0]

    def apply(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._cho, b, check_finite=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.apply(np.eye(self.n))


def precompute_gram(X) -> GramInverse:
    return GramInverse(X)


@dataclass
class SolverState:
    J: np.ndarray
    alpha: np.ndarray
    e: np.ndarray
    y1: np.ndarray
    Y2: np.ndarray
    mu: float

    @classmethod
    def zeros(cls, m: int, n: int, mu: float, rank: int | None = None) -> "SolverState":
        r = m if rank is None else rank
        return cls(np.zeros((r, n)), np.zeros(n), np.zeros(m),
                   np.zeros(m), np.zeros((r, n)), float(mu))


def update_J(state: SolverState, X, lam: float) -> np.ndarray:
    return svt(X * state.alpha - state.Y2 / state.mu, lam / state.mu)


def update_alpha(state: SolverState, X, y, gram: GramInverse, B=None) -> np.ndarray:
    """Exact minimizer of the augmented Lagrangian in ``alpha``.

    ``B`` is the matrix paired with ``J`` and ``Y2`` in the split
    constraint; it defaults to ``X`` and is only different when the solver
    works in reduced coordinates.
    """
    X = np.asarray(X, dtype=float)
    B = X if B is None else B
    if y.shape[0] != X.shape[0] or gram.n != X.shape[1]:
        raise DimensionMismatch("query, dictionary and Gram cache disagree in size")
    mu = state.mu
    rhs = X.T @ (state.y1 / mu + y - state.e)
    rhs += np.einsum("ij,ij->j", B, state.Y2 / mu + state.J)
    return gram.apply(rhs)


def update_e(state: SolverState, X, y) -> np.ndarray:
    return soft_threshold(y - X @ state.alpha + state.y1 / state.mu, 1.0 / state.mu)


def objective(X, y, alpha, lam: float) -> float:
    """``||y - X alpha||_1 + lam * ||X Diag(alpha)||_*``."""
    X = np.asarray(X, dtype=float)
    return float(np.abs(y - X @ alpha).sum() + lam * correlation_regularizer(X, alpha))


def solve_trace_lasso(X, y, opts: SolverOptions | None = None,
                      gram: GramInverse | None = None) -> CodingResult:
    """Code ``y`` over the (column-normalized) matrix ``X``.

    Runs until both infinity-norm feasibility gaps drop to ``opts.epsilon``
    or ``opts.max_iters`` is hit.  In the latter case the iterate with the
    smallest max gap seen is returned with ``converged=False``.

    ``J`` and ``Y2`` always stay inside the column space of ``X``.  For tall
    dictionaries (m > n) they are therefore stored as coordinates in an
    orthonormal basis ``Q`` of that space, with ``X = Q R``, which turns each
    SVD from m x n into n x n without changing the iterates.
    """
    opts = opts or SolverOptions()
    X = np.asarray(X, dtype=float)
    m, n = X.shape
    y = as_query(y, m)
    if gram is None:
        gram = precompute_gram(X)

    if m > n:
        Q, B = scipy.linalg.qr(X, mode="economic", check_finite=False)
    else:
        Q, B = None, X
    state = SolverState.zeros(m, n, opts.mu0, rank=B.shape[0])

    best = None
    best_gap = np.inf
    converged = False
    gaps = (np.inf, np.inf)
    it = 0
    for it in range(1, int(opts.max_iters) + 1):
        state.J = update_J(state, B, opts.lam)
        state.alpha = update_alpha(state, X, y, gram, B)
        state.e = update_e(state, X, y)

        r1 = y - X @ state.alpha - state.e
        r2 = state.J - B * state.alpha
        state.y1 = state.y1 + state.mu * r1
        state.Y2 = state.Y2 + state.mu * r2
        state.mu = min(opts.rho * state.mu, opts.mu_max)

        full_r2 = r2 if Q is None else Q @ r2
        gaps = (float(np.abs(r1).max(initial=0.0)), float(np.abs(full_r2).max(initial=0.0)))
        if not (np.isfinite(gaps[0]) and np.isfinite(gaps[1])
                and np.all(np.isfinite(state.alpha))):
            raise NumericalDivergence(f"non-finite iterate at iteration {it}")
        if gaps[0] <= opts.epsilon and gaps[1] <= opts.epsilon:
            converged = True
            break
        if max(gaps) < best_gap:
            best_gap = max(gaps)
            best = (state.alpha.copy(), state.e.copy(), gaps)

    if converged or best is None:
        alpha, e = state.alpha, state.e
    else:
        alpha, e, gaps = best
        log.debug("trace-lasso solver hit max_iters=%d (best gap %.3g)", opts.max_iters, best_gap)
    return CodingResult(
        alpha=alpha,
        noise=e,
        iterations=it,
        converged=converged,
        objective=objective(X, y, alpha, opts.lam),
        primal_residuals=gaps,
    )
