"""PCA feature extraction (eigenfaces-style) with JSON persistence."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDimension, ParseError

FORMAT = "asrc-pca/1"


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray
    explained: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def to_json(self) -> str:
        return json.dumps({
            "format": FORMAT,
            "m": int(self.basis.shape[0]),
            "d": int(self.basis.shape[1]),
            "mean": _encode(self.mean),
            "basis": _encode(self.basis),
            "explained": _encode(self.explained),
        })

    @classmethod
    def from_json(cls, text: str) -> "PcaModel":
        try:
            blob = json.loads(text)
            if blob.get("format") != FORMAT:
                raise ParseError(f"not an {FORMAT} blob")
            m, d = int(blob["m"]), int(blob["d"])
            return cls(_decode(blob["mean"], (m,)), _decode(blob["basis"], (m, d)),
                       _decode(blob["explained"], (d,)))
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed PCA model: {exc}") from None


def _encode(a: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii")


def _decode(s: str, shape) -> np.ndarray:
    return np.frombuffer(base64.b64decode(s), dtype="<f8").reshape(shape).copy()


def fit_pca(train, d: int) -> PcaModel:
    """Fit a ``d``-dimensional PCA on the columns of ``train`` (m x n).

    Each basis vector is signed so its largest-magnitude entry is positive.
    ``explained`` holds covariance eigenvalues (``1/(n-1)`` normalization).
    """
    train = np.asarray(train, dtype=float)
    m, n = train.shape
    if not 1 <= d <= min(m, n - 1):
        raise InvalidDimension(f"PCA dimension {d} outside [1, {min(m, n - 1)}]")
    mean = train.mean(axis=1)
    centered = train - mean[:, None]
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    basis = u[:, :d].copy()
    pivot = np.abs(basis).argmax(axis=0)
    signs = np.sign(basis[pivot, np.arange(d)])
    basis *= np.where(signs == 0, 1.0, signs)
    explained = s[:d] ** 2 / (n - 1)
    return PcaModel(mean, basis, explained)


def project(model: PcaModel, samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    vec = samples.ndim == 1
    if vec:
        samples = samples[:, None]
    if samples.shape[0] != model.mean.shape[0]:
        raise DimensionMismatch(
            f"samples have {samples.shape[0]} features, model expects {model.mean.shape[0]}")
    out = model.basis.T @ (samples - model.mean[:, None])
    return out[:, 0] if vec else out
