"""Self-checks of the analytic properties of the trace-Lasso regularizer
and the proximal operators, run by ``bench properties``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .prox import correlation_regularizer, soft_threshold, svt, trace_norm


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _unit_columns(rng, m, n):
    X = rng.standard_normal((m, n))
    return X / np.linalg.norm(X, axis=0)


def sandwich(rng, trials=1000, tol=1e-9) -> Check:
    worst = -np.inf
    for _ in range(trials):
        m, n = rng.integers(4, 33), rng.integers(4, 65)
        X = _unit_columns(rng, m, n)
        a = rng.standard_normal(n)
        om = correlation_regularizer(X, a)
        worst = max(worst, np.linalg.norm(a) - om, om - np.abs(a).sum())
    return Check("sandwich l2 <= omega <= l1", bool(worst <= tol), f"max violation {worst:.3g}")


def orthogonal_limit(rng, trials=200, rtol=1e-8) -> Check:
    worst = 0.0
    for _ in range(trials):
        n = rng.integers(2, 20)
        m = rng.integers(n, 40)
        Q = scipy.stats.ortho_group.rvs(m, random_state=rng)[:, :n]
        a = rng.standard_normal(n)
        l1 = np.abs(a).sum()
        worst = max(worst, abs(correlation_regularizer(Q, a) - l1) / l1)
    return Check("orthonormal columns give l1", bool(worst <= rtol), f"max rel err {worst:.3g}")


def rank_one_limit(rng, trials=200, rtol=1e-8) -> Check:
    worst = 0.0
    for _ in range(trials):
        m, n = rng.integers(2, 40), rng.integers(2, 40)
        x = rng.standard_normal(m)
        X = np.outer(x / np.linalg.norm(x), np.ones(n))
        a = rng.standard_normal(n)
        l2 = np.linalg.norm(a)
        worst = max(worst, abs(correlation_regularizer(X, a) - l2) / l2)
    return Check("identical columns give l2", bool(worst <= rtol), f"max rel err {worst:.3g}")


def invariances(rng, trials=200, rtol=1e-10) -> Check:
    worst = 0.0
    for _ in range(trials):
        X = _unit_columns(rng, 8, 12)
        a = rng.standard_normal(12)
        base = correlation_regularizer(X, a)
        p = rng.permutation(12)
        c = rng.standard_normal() * 5
        worst = max(worst,
                    abs(correlation_regularizer(X[:, p], a[p]) - base) / base,
                    abs(correlation_regularizer(X, c * a) - abs(c) * base) / (abs(c) * base))
    return Check("permutation invariance and homogeneity", bool(worst <= rtol), f"max rel err {worst:.3g}")


def nonexpansive(rng, trials=200) -> Check:
    worst = -np.inf
    for _ in range(trials):
        A, B = rng.standard_normal((2, 6, 5))
        tau = rng.uniform(0, 2)
        worst = max(worst,
                    np.linalg.norm(svt(A, tau) - svt(B, tau)) - np.linalg.norm(A - B),
                    np.linalg.norm(soft_threshold(A[0], tau) - soft_threshold(B[0], tau))
                    - np.linalg.norm(A[0] - B[0]))
    return Check("prox operators are nonexpansive", bool(worst <= 1e-12), f"max excess {worst:.3g}")


def trace_vs_frobenius(rng, trials=200) -> Check:
    ok = True
    for _ in range(trials):
        M = rng.standard_normal((5, 4))
        ok &= trace_norm(M) >= np.linalg.norm(M) - 1e-12
        R = np.outer(rng.standard_normal(5), rng.standard_normal(4))
        ok &= abs(trace_norm(R) - np.linalg.norm(R)) <= 1e-10 * np.linalg.norm(R)
    return Check("trace norm >= Frobenius, equal at rank one", bool(ok), "")


ALL = (sandwich, orthogonal_limit, rank_one_limit, invariances, nonexpansive, trace_vs_frobenius)


def run_all(seed: int = 0) -> list[Check]:
    out = []
    for fn in ALL:
        t0 = time.perf_counter()
        c = fn(np.random.default_rng([seed, len(out)]))
        c.detail = f"{c.detail} ({time.perf_counter() - t0:.2f}s)".strip()
        out.append(c)
    return out
