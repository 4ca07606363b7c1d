"""Uniform random pixel corruption."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInput


def n_corrupted(p: float, m: int) -> int:
    # Guard against 0.29 * 100 == 28.999999999999996.
    return min(m, int(math.floor(p * m + 1e-9)))


def corrupt_pixels(column, p: float, rng, value_range=(0.0, 1.0)) -> np.ndarray:
    """Replace ``floor(p * m)`` distinct random entries with uniform noise."""
    if not 0 <= p <= 1:
        raise InvalidInput(f"corruption fraction must lie in [0, 1], got {p}")
    lo, hi = value_range
    out = np.array(column, dtype=float, copy=True)
    count = n_corrupted(p, out.shape[0])
    if count:
        idx = rng.choice(out.shape[0], size=count, replace=False)
        out[idx] = rng.uniform(lo, hi, size=count)
    return out


def corrupt_dataset(ds, p: float, seed, value_range=(0.0, 1.0), stream: int = 0):
    """Corrupt every column of ``ds`` with its own RNG stream.

    Column ``i`` uses ``SeedSequence([seed, stream, i])`` so the result does
    not depend on processing order.
    """
    X = ds.features if hasattr(ds, "features") else np.asarray(ds, dtype=float)
    out = np.empty_like(X)
    for i in range(X.shape[1]):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), i]))
        out[:, i] = corrupt_pixels(X[:, i], p, rng, value_range)
    return ds.with_features(out) if hasattr(ds, "with_features") else out
