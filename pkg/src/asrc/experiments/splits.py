"""Train/test split protocols.  Splits are returned as index arrays."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import InsufficientSamples, InvalidFoldCount


class Split(NamedTuple):
    train: np.ndarray
    test: np.ndarray


def _labels(ds):
    return np.asarray(getattr(ds, "labels", ds))


def split_per_class(ds, t: int, seed) -> Split:
    """``t`` random training samples per class, the rest for testing."""
    labels = _labels(ds)
    if t < 1:
        raise ValueError("t must be >= 1")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for k in np.unique(labels):
        idx = np.flatnonzero(labels == k)
        if idx.size <= t:
            raise InsufficientSamples(int(k), idx.size, t)
        perm = rng.permutation(idx)
        train.append(perm[:t])
        test.append(perm[t:])
    return Split(np.sort(np.concatenate(train)), np.sort(np.concatenate(test)))


def kfold(ds, k: int, seed) -> list[Split]:
    """Stratified k-fold partition.

    Samples of each class are shuffled and dealt round-robin over the folds,
    continuing where the previous class stopped, so every fold holds each
    class within one sample of ``n_k / k`` and fold sizes differ by <= 1.
    """
    labels = _labels(ds)
    n = labels.shape[0]
    if k < 2 or k > n:
        raise InvalidFoldCount(f"cannot make {k} folds from {n} samples")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        fold_of[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    all_idx = np.arange(n)
    return [Split(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def holdout(labels, fraction: float, seed) -> Split:
    """Stratified holdout used for hyperparameter validation.

    Takes ``round(fraction * n_k)`` samples of each class for validation but
    always leaves at least one for training; classes with a single sample go
    entirely to training.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, val = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        nv = min(int(round(fraction * idx.size)), idx.size - 1)
        val.append(idx[:nv])
        train.append(idx[nv:])
    return Split(np.sort(np.concatenate(train)), np.sort(np.concatenate(val)))
