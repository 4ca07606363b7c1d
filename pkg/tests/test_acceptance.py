"""Exit criteria, one test per criterion, each at its stated tolerance."""

import time
from pathlib import Path

import cvxpy as cp
import numpy as np
import pytest
import scipy.stats

from asrc.classifiers import ASRC, CRC, SRC
from asrc.experiments import BenchmarkConfig, run_benchmark, split_per_class, synth_face_like
from asrc.prox import correlation_regularizer
from asrc.solver import objective, solve_trace_lasso
from asrc.types import Dictionary, SolverOptions

ROOT = Path(__file__).resolve().parents[1]


def unit_columns(rng, m, n):
    X = rng.standard_normal((m, n))
    return X / np.linalg.norm(X, axis=0)


def test_c01_sandwich(record):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = -np.inf
    for _ in range(1000):
        m, n = rng.integers(4, 33), rng.integers(4, 65)
        X = unit_columns(rng, m, n)
        a = rng.standard_normal(n)
        om = correlation_regularizer(X, a)
        worst = max(worst, np.linalg.norm(a) - 1e-9 - om, om - np.abs(a).sum() - 1e-9)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0 and elapsed < 10
    record(1, ok, f"sandwich over 1000 instances, worst slack {worst:.3g}, {elapsed:.2f}s")
    assert ok


def test_c02_orthogonal_limit(record):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(200):
        n = rng.integers(2, 24)
        m = rng.integers(n, 48)
        Q = scipy.stats.ortho_group.rvs(int(m), random_state=rng)[:, :n]
        a = rng.standard_normal(n)
        l1 = np.abs(a).sum()
        worst = max(worst, abs(correlation_regularizer(Q, a) - l1) / l1)
    record(2, worst <= 1e-8, f"orthonormal X, max |omega - l1|/l1 = {worst:.3g}")
    assert worst <= 1e-8


def test_c03_rank_one_limit(record):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        m, n = rng.integers(2, 48, size=2)
        x = rng.standard_normal(m)
        X = np.outer(x / np.linalg.norm(x), np.ones(n))
        a = rng.standard_normal(n)
        l2 = np.linalg.norm(a)
        worst = max(worst, abs(correlation_regularizer(X, a) - l2) / l2)
    record(3, worst <= 1e-8, f"X = x1 1^T, max |omega - l2|/l2 = {worst:.3g}")
    assert worst <= 1e-8


def reference_objective(X, y, lam):
    a = cp.Variable(X.shape[1])
    prob = cp.Problem(cp.Minimize(cp.norm1(y - X @ a) + lam * cp.normNuc(X @ cp.diag(a))))
    prob.solve(solver=cp.CLARABEL)
    return objective(X, y, a.value, lam)


def test_c04_solver_optimality(record):
    rng = np.random.default_rng(4)
    opts_kw = dict(rho=1.01)
    t0 = time.perf_counter()
    worst = -np.inf
    for i in range(50):
        m, n = rng.integers(3, 9), rng.integers(3, 11)
        lam = (0.05, 0.1, 0.5)[i % 3]
        X = unit_columns(rng, m, n)
        y = rng.standard_normal(m)
        res = solve_trace_lasso(X, y, SolverOptions(lam=lam, **opts_kw))
        ref = reference_objective(X, y, lam)
        worst = max(worst, abs(res.objective - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 120
    record(4, ok, f"ADM vs interior-point reference, worst rel gap {worst:.3g}, {elapsed:.1f}s")
    assert ok


def test_c05_solver_feasibility(record):
    rng = np.random.default_rng(5)
    opts = SolverOptions(max_iters=5000)
    bad = 0
    worst = 0.0
    for _ in range(200):
        X = unit_columns(rng, 20, 30)
        y = rng.standard_normal(20)
        res = solve_trace_lasso(X, y, opts)
        worst = max(worst, *res.primal_residuals)
        bad += not (res.converged and max(res.primal_residuals) <= 1e-6)
    record(5, bad == 0, f"{200 - bad}/200 converged, worst gap {worst:.3g}")
    assert bad == 0


def _agreement(rho, other):
    ds = synth_face_like(10, 30, 256, rho, seed=6)
    sp = split_per_class(ds, 10, seed=6)
    D = ds.subset(sp.train).as_dictionary()
    Q = ds.subset(sp.test)
    a, b = ASRC().fit(D), other.fit(D)
    same = sum(a.predict(Q.features[:, i]).class_id == b.predict(Q.features[:, i]).class_id
               for i in range(Q.n_samples))
    return same / Q.n_samples, Q.n_samples


@pytest.mark.slow
def test_c06_limit_regime_agreement(record):
    lo, n_lo = _agreement(0.05, SRC())
    hi, n_hi = _agreement(0.95, CRC())
    ok = lo >= 0.95 and hi >= 0.95 and n_lo == n_hi == 200
    record(6, ok, f"rho=0.05 ASRC~SRC {lo:.3f}, rho=0.95 ASRC~CRC {hi:.3f} (200 queries each)")
    assert ok


def test_c07_sparsity_ordering(record):
    rng = np.random.default_rng(7)
    counts = {"src": [], "asrc": [], "crc": []}
    for _ in range(100):
        X = rng.standard_normal((20, 40))
        y = rng.standard_normal(20)
        D = Dictionary(X, np.arange(40) % 4)
        for name, clf in (("src", SRC()), ("asrc", ASRC()), ("crc", CRC())):
            alpha = clf.fit(D).predict(y).coding.alpha
            counts[name].append(int(np.count_nonzero(np.abs(alpha) > 1e-4)))
    med = {k: float(np.median(v)) for k, v in counts.items()}
    ok = med["src"] <= med["asrc"] <= med["crc"]
    record(7, ok, f"median nnz SRC {med['src']:g} <= ASRC {med['asrc']:g} <= CRC {med['crc']:g}")
    assert ok


def _uci(name, path):
    cfg = BenchmarkConfig.from_dict({
        "name": f"uci-{name}", "seed": 0, "methods": ["asrc"], "protocol": "kfold", "k": 10,
        "preprocess": "minmax", "selection": "validation",
        "datasets": [{"name": name, "path": str(ROOT / path), "label_column": "class"}],
        "grids": {"asrc": {"lambda": [1e-3, 1e-2, 1e-1, 1.0, 10.0]}},
    })
    t0 = time.perf_counter()
    report = run_benchmark(cfg)
    return report, time.perf_counter() - t0


@pytest.mark.slow
@pytest.mark.parametrize("name,path,target,band", [
    ("heart", "data/uci/heart_cleveland.csv", 85.93, 7.0),
    ("ionosphere", "data/uci/ionosphere.csv", 94.41, 4.0),
])
def test_c08_uci_reproduction(record, name, path, target, band):
    report, elapsed = _uci(name, path)
    row = report.row(name, "asrc")
    acc = 100 * row.accuracy_mean
    pre = report.metadata["preprocessing"]["features"][name]
    ok = abs(acc - target) <= band and elapsed < 600 and "[-1, 1]" in pre
    record(8, ok, f"{name} ASRC {acc:.2f} +- {100 * row.accuracy_std:.2f} "
                  f"(target {target} +- {band}), {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_c09_corruption_trend(record):
    cfg = BenchmarkConfig.from_file(ROOT / "configs" / "corruption.toml")
    cfg.methods = ["asrc", "crc"]
    cfg.corruption = [0.0, 0.2, 0.4, 0.6]
    report = run_benchmark(cfg)
    acc = {(r.method, r.corruption): 100 * r.accuracy_mean for r in report.results}
    trend = acc[("asrc", 0.2)] > acc[("asrc", 0.6)]
    margins = {p: acc[("asrc", p)] - acc[("crc", p)] for p in (0.0, 0.2, 0.4)}
    ok = trend and all(v >= -2.0 for v in margins.values())
    detail = ", ".join(f"p={p:.1f} ASRC {acc[('asrc', p)]:.1f} CRC {acc[('crc', p)]:.1f}"
                       for p in cfg.corruption)
    record(9, ok, detail)
    assert ok


def test_c10_determinism(record, tmp_path):
    cfg = BenchmarkConfig.from_file(ROOT / "configs" / "toy.json")
    cfg.corruption = [0.0, 0.3]
    cfg.corruption_range = "data"
    a = run_benchmark(cfg).to_json()
    b = run_benchmark(BenchmarkConfig.from_file(ROOT / "configs" / "toy.json").__class__(
        **{**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__}})).to_json()
    ok = a.encode() == b.encode()
    record(10, ok, f"two runs, JSON reports byte-identical ({len(a)} bytes)")
    assert ok
