"""Shared data model: dictionaries, coding results and solver options."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, InvalidInput, UnknownClass, ZeroColumn

ZERO_NORM = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Training samples stored as columns, with one class id per column.

    ``data`` is ``m x n`` (feature dim by sample count).  Class ids are
    dense integers ``0..K-1``; use :func:`densify_labels` on raw labels.
    """

    data: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float, order="F", copy=True)
        labels = np.array(self.labels, copy=True).astype(np.int64)
        if data.ndim != 2:
            raise InvalidInput("dictionary data must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != data.shape[1]:
            raise DimensionMismatch(
                f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels "
                f"for {data.shape[1]} columns")
        if not np.all(np.isfinite(data)):
            raise InvalidInput("dictionary contains non-finite entries")
        if labels.size and labels.min() < 0:
            raise InvalidInput("class ids must be non-negative")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @cached_property
    def class_index(self) -> dict[int, np.ndarray]:
        return {int(k): np.flatnonzero(self.labels == k) for k in self.classes}

    def columns_of(self, k: int) -> np.ndarray:
        try:
            return self.class_index[int(k)]
        except KeyError:
            raise UnknownClass(k) from None


@dataclass(frozen=True)
class SolverOptions:
    """Parameters of the trace-Lasso ADM solver.

    Defaults follow the usual inexact-ALM schedule: the penalty ``mu``
    starts tiny and grows geometrically by ``rho`` up to ``mu_max``.
    """

    lam: float = 1e-3
    mu0: float = 1e-6
    rho: float = 1.1
    mu_max: float = 1e10
    epsilon: float = 1e-8
    max_iters: int = 10_000

    def __post_init__(self):
        for name in ("lam", "mu0", "mu_max", "epsilon"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidInput(f"{name} must be a positive finite number, got {v}")
        if not self.rho > 1:
            raise InvalidInput(f"rho must exceed 1, got {self.rho}")
        if self.mu_max < self.mu0:
            raise InvalidInput("mu_max must be >= mu0")
        if int(self.max_iters) < 1:
            raise InvalidInput("max_iters must be >= 1")


@dataclass
class CodingResult:
    alpha: np.ndarray
    noise: np.ndarray
    iterations: int
    converged: bool
    objective: float
    primal_residuals: tuple[float, float] = (0.0, 0.0)
    extra: dict = field(default_factory=dict)


def as_query(y, m: int | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise InvalidInput("query contains non-finite entries")
    if m is not None and y.shape[0] != m:
        raise DimensionMismatch(f"query has length {y.shape[0]}, dictionary has {m} rows")
    return y


def densify_labels(raw) -> tuple[np.ndarray, list]:
    """Map arbitrary labels onto ``0..K-1`` in sorted order of the originals."""
    values, codes = np.unique(np.asarray(raw), return_inverse=True)
    return codes.astype(np.int64), values.tolist()


def normalize_columns(D: Dictionary) -> Dictionary:
    norms = np.linalg.norm(D.data, axis=0)
    bad = np.flatnonzero(norms < ZERO_NORM)
    if bad.size:
        raise ZeroColumn(int(bad[0]))
    return Dictionary(D.data / norms, D.labels)


def is_normalized(D: Dictionary, tol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(np.linalg.norm(D.data, axis=0) - 1.0) <= tol))


def class_slice(D: Dictionary, result, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Columns of class ``k`` and the matching coefficients.

    ``result`` may be a :class:`CodingResult` or a bare coefficient vector.
    """
    alpha = result.alpha if isinstance(result, CodingResult) else np.asarray(result)
    if alpha.shape[0] != D.shape[1]:
        raise DimensionMismatch(f"alpha has length {alpha.shape[0]}, dictionary has {D.shape[1]} columns")
    idx = D.columns_of(k)
    return D.data[:, idx], alpha[idx]
