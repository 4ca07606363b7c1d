"""Residual-based classifiers: ASRC and the NN / NFS / SRC / CRC baselines.

Every classifier codes the query somehow, computes one residual per class
and predicts the class with the smallest residual (ties go to the smaller
class id).  Classes cache per-dictionary work in :meth:`fit` so the same
instance can be reused across many queries, including from threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np
import scipy.linalg
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import Lasso

from .errors import DimensionMismatch, InvalidInput
from .solver import precompute_gram, solve_trace_lasso
from .types import (CodingResult, Dictionary, SolverOptions, as_query,
                    is_normalized, normalize_columns)

NFS_RANK_RTOL = 1e-10


@dataclass
class Prediction:
    class_id: int
    residuals: np.ndarray
    coding: CodingResult | None = None


def class_residuals(D: Dictionary, alpha, y) -> np.ndarray:
    """``r_k = ||y - X_k alpha_k||_2`` for every class id ``k < K``."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    y = as_query(y, D.shape[0])
    if alpha.shape[0] != D.shape[1]:
        raise DimensionMismatch(f"alpha has length {alpha.shape[0]}, dictionary has {D.shape[1]} columns")
    # Per-class partial reconstructions in one pass: X @ (onehot * alpha).
    onehot = np.zeros((D.shape[1], D.n_classes))
    onehot[np.arange(D.shape[1]), D.labels] = alpha
    recon = D.data @ onehot
    return np.linalg.norm(y[:, None] - recon, axis=0)


def _predict(residuals, coding=None) -> Prediction:
    residuals = np.asarray(residuals, dtype=float)
    return Prediction(int(np.argmin(residuals)), residuals, coding)


class Classifier:
    """Base class; subclasses implement :meth:`_prepare` and :meth:`predict`."""

    name = "base"
    normalize = True

    def fit(self, D: Dictionary) -> "Classifier":
        if self.normalize and not is_normalized(D):
            D = normalize_columns(D)
        self.dictionary_ = D
        self._prepare(D)
        return self

    def _prepare(self, D: Dictionary) -> None:
        pass

    def predict(self, y) -> Prediction:
        raise NotImplementedError

    def params(self) -> dict:
        return {}


class ASRC(Classifier):
    """Trace-Lasso coding followed by class-wise residuals."""

    name = "asrc"

    def __init__(self, opts: SolverOptions | None = None, lam: float | None = None):
        opts = opts or SolverOptions()
        if lam is not None:
            opts = SolverOptions(lam=lam, mu0=opts.mu0, rho=opts.rho, mu_max=opts.mu_max,
                                 epsilon=opts.epsilon, max_iters=opts.max_iters)
        self.opts = opts

    def _prepare(self, D):
        self._gram = precompute_gram(D.data)

    def predict(self, y) -> Prediction:
        D = self.dictionary_
        y = as_query(y, D.shape[0])
        coding = solve_trace_lasso(D.data, y, self.opts, self._gram)
        return _predict(class_residuals(D, coding.alpha, y), coding)

    def params(self):
        return {"lambda": self.opts.lam}


class SRC(Classifier):
    """l1-regularized coding ``min 0.5||y - X a||^2 + lam ||a||_1``.

    Coding is delegated to scikit-learn's coordinate-descent Lasso with a
    cached Gram matrix; its objective is rescaled by the row count ``m``.
    """

    name = "src"

    def __init__(self, lam: float = 1e-3, tol: float = 1e-8, max_iters: int = 100_000):
        if not lam > 0:
            raise InvalidInput("lambda must be positive")
        self.lam = lam
        self.tol = tol
        self.max_iters = max_iters

    def _prepare(self, D):
        self._gram = D.data.T @ D.data

    def code(self, y) -> CodingResult:
        D = self.dictionary_
        y = as_query(y, D.shape[0])
        m = D.shape[0]
        model = Lasso(alpha=self.lam / m, fit_intercept=False, precompute=self._gram,
                      tol=self.tol, max_iter=self.max_iters)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            model.fit(D.data, y)
        converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
        alpha = np.asarray(model.coef_, dtype=float).copy()
        resid = y - D.data @ alpha
        obj = 0.5 * float(resid @ resid) + self.lam * float(np.abs(alpha).sum())
        return CodingResult(alpha, resid, int(np.max(model.n_iter_)), converged, obj)

    def predict(self, y) -> Prediction:
        coding = self.code(y)
        return _predict(class_residuals(self.dictionary_, coding.alpha, y), coding)

    def params(self):
        return {"lambda": self.lam}


class CRC(Classifier):
    """Ridge coding ``alpha = (X^T X + sigma I)^{-1} X^T y``."""

    name = "crc"

    def __init__(self, sigma: float = 1e-2):
        if not sigma > 0:
            raise InvalidInput("sigma must be positive")
        self.sigma = sigma

    def _prepare(self, D):
        X = D.data
        self._chol = scipy.linalg.cho_factor(X.T @ X + self.sigma * np.eye(X.shape[1]), lower=True)

    def code(self, y) -> CodingResult:
        D = self.dictionary_
        y = as_query(y, D.shape[0])
        alpha = scipy.linalg.cho_solve(self._chol, D.data.T @ y)
        resid = y - D.data @ alpha
        obj = 0.5 * float(resid @ resid) + 0.5 * self.sigma * float(alpha @ alpha)
        return CodingResult(alpha, resid, 1, True, obj)

    def predict(self, y) -> Prediction:
        coding = self.code(y)
        return _predict(class_residuals(self.dictionary_, coding.alpha, y), coding)

    def params(self):
        return {"sigma": self.sigma}


class NN(Classifier):
    """Nearest neighbour; class residual is the distance to its closest column."""

    name = "nn"
    normalize = False

    def predict(self, y) -> Prediction:
        D = self.dictionary_
        y = as_query(y, D.shape[0])
        dist = np.linalg.norm(D.data - y[:, None], axis=0)
        res = np.full(D.n_classes, np.inf)
        np.minimum.at(res, D.labels, dist)
        return _predict(res)


class NFS(Classifier):
    """Nearest feature subspace: distance from ``y`` to ``span(X_k)``."""

    name = "nfs"
    normalize = False

    def _prepare(self, D):
        self._bases = {}
        for k in range(D.n_classes):
            idx = D.class_index.get(k)
            if idx is None or idx.size == 0:
                self._bases[k] = np.zeros((D.shape[0], 0))
                continue
            Q, R, _ = scipy.linalg.qr(D.data[:, idx], mode="economic", pivoting=True)
            diag = np.abs(np.diag(R))
            rank = int(np.count_nonzero(diag > NFS_RANK_RTOL * diag[0])) if diag.size and diag[0] > 0 else 0
            self._bases[k] = Q[:, :rank]

    def predict(self, y) -> Prediction:
        D = self.dictionary_
        y = as_query(y, D.shape[0])
        res = np.empty(D.n_classes)
        for k, Q in self._bases.items():
            res[k] = np.linalg.norm(y - Q @ (Q.T @ y))
        return _predict(res)


METHODS = {c.name: c for c in (ASRC, SRC, CRC, NN, NFS)}


def make_classifier(method: str, **params) -> Classifier:
    """Build a classifier by name; ``lambda``/``sigma`` keys are accepted."""
    method = method.lower()
    if method not in METHODS:
        raise InvalidInput(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    params = {("lam" if k == "lambda" else k): v for k, v in params.items() if v is not None}
    if method == "asrc":
        opts = params.pop("opts", None)
        return ASRC(opts, **params)
    return METHODS[method](**params)


def asrc_classify(D: Dictionary, y, opts: SolverOptions | None = None) -> Prediction:
    return ASRC(opts).fit(D).predict(y)


def src_classify(D: Dictionary, y, lambda_l1: float = 1e-3, **kw) -> Prediction:
    return SRC(lambda_l1, **kw).fit(D).predict(y)


def crc_classify(D: Dictionary, y, sigma: float = 1e-2) -> Prediction:
    return CRC(sigma).fit(D).predict(y)


def nn_classify(D: Dictionary, y) -> Prediction:
    return NN().fit(D).predict(y)


def nfs_classify(D: Dictionary, y) -> Prediction:
    return NFS().fit(D).predict(y)
