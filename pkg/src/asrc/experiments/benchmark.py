"""Benchmark runner and report I/O.

A run is fully determined by its config: split seeds are derived from
``(seed, dataset index, repeat)`` and corruption streams from
``(seed, split id, query index)``, so threading never changes a number.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..classifiers import METHODS, make_classifier
from ..errors import ASRCError, ConfigError
from ..features import fit_pca, project
from ..types import SolverOptions
from .corruption import corrupt_dataset
from .data import LabeledDataset, load_dataset, minmax_scale, standardize
from .splits import holdout, kfold, split_per_class

log = logging.getLogger(__name__)

STD_DDOF = 1
DEFAULT_GRIDS = {
    "asrc": {"lambda": [1e-4, 1e-3, 1e-2, 1e-1]},
    "src": {"lambda": [1e-4, 1e-3, 1e-2, 1e-1]},
    "crc": {"sigma": [1e-3, 1e-2, 1e-1]},
}
PREPROCESS = {
    "none": "raw features",
    "standardize": "per-feature z-score with training-split statistics",
    "minmax": "per-feature linear map onto [-1, 1] with training-split min/max",
}
CSV_COLUMNS = ["dataset", "method", "protocol", "param", "dim", "dim_requested",
               "corruption", "accuracy_mean", "accuracy_std", "n_splits", "failures",
               "hyperparameters", "wall_time"]


@dataclass
class BenchmarkConfig:
    datasets: list[dict]
    methods: list[str] = field(default_factory=lambda: ["asrc"])
    name: str = "benchmark"
    seed: int = 0
    protocol: str = "kfold"
    k: int = 10
    t: list[int] = field(default_factory=lambda: [5])
    repeats: int = 1
    dims: list = field(default_factory=lambda: [None])
    corruption: list[float] = field(default_factory=lambda: [0.0])
    corruption_range: object = (0.0, 1.0)
    grids: dict = field(default_factory=dict)
    selection: str = "validation"
    validation_fraction: float = 0.2
    preprocess: str = "none"
    solver: dict = field(default_factory=dict)
    n_jobs: int = 1
    base_dir: Path | None = None

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("config lists no datasets")
        self.methods = [m.lower() for m in self.methods]
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; known: {sorted(METHODS)}")
        if self.protocol not in ("kfold", "per_class"):
            raise ConfigError(f"protocol must be 'kfold' or 'per_class', not {self.protocol!r}")
        if self.protocol == "kfold" and self.k < 2:
            raise ConfigError("k must be >= 2")
        if isinstance(self.t, int):
            self.t = [self.t]
        if self.protocol == "per_class" and any(t < 1 for t in self.t):
            raise ConfigError("t must be >= 1")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.selection not in ("validation", "first"):
            raise ConfigError("selection must be 'validation' or 'first'")
        for spec in self.datasets:
            if spec.get("preprocess", self.preprocess) not in PREPROCESS:
                raise ConfigError(f"preprocess must be one of {sorted(PREPROCESS)}")
        if any(not 0 <= p <= 1 for p in self.corruption):
            raise ConfigError("corruption fractions must lie in [0, 1]")
        if self.corruption_range != "data":
            try:
                lo, hi = self.corruption_range
                self.corruption_range = (float(lo), float(hi))
            except (TypeError, ValueError):
                raise ConfigError("corruption_range must be 'data' or [lo, hi]") from None
        try:
            self.solver_options()
        except ASRCError as exc:
            raise ConfigError(f"bad solver options: {exc}") from None

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "BenchmarkConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "datasets" not in d:
            raise ConfigError("config needs a 'datasets' list")
        try:
            return cls(**d, base_dir=Path(base_dir) if base_dir else None)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path) -> "BenchmarkConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            if path.suffix == ".toml":
                try:
                    import tomllib
                except ImportError:
                    import tomli as tomllib
                d = tomllib.loads(text)
            else:
                d = json.loads(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        return cls.from_dict(d, base_dir=path.parent)

    def solver_options(self) -> SolverOptions:
        kw = {("lam" if k == "lambda" else k): v for k, v in self.solver.items()}
        return SolverOptions(**kw)

    def grid(self, method: str) -> list[dict]:
        g = self.grids.get(method, DEFAULT_GRIDS.get(method, {}))
        if not g:
            return [{}]
        keys = sorted(g)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(g[k] for k in keys))]

    def describe(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d.pop("n_jobs")
        d["corruption_range"] = (self.corruption_range if self.corruption_range == "data"
                                 else list(self.corruption_range))
        d["grids"] = {m: self.grids.get(m, DEFAULT_GRIDS.get(m, {})) for m in self.methods}
        return d


@dataclass
class ResultRow:
    dataset: str
    method: str
    protocol: str
    param: int
    dim: int | None
    dim_requested: int | None
    corruption: float
    accuracy_mean: float
    accuracy_std: float
    split_accuracies: list[float]
    hyperparameters: list[dict]
    failures: int = 0
    wall_time: float | None = None
    predictions: list | None = None

    @property
    def n_splits(self) -> int:
        return len(self.split_accuracies)


@dataclass
class BenchmarkReport:
    name: str
    seed: int
    metadata: dict
    results: list[ResultRow]

    def to_dict(self) -> dict:
        rows = []
        for r in self.results:
            d = asdict(r)
            if d["wall_time"] is None:
                d.pop("wall_time")
            if d["predictions"] is None:
                d.pop("predictions")
            rows.append(d)
        return {"name": self.name, "seed": self.seed, "metadata": self.metadata, "results": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkReport":
        return cls(d["name"], d["seed"], d["metadata"], [ResultRow(**r) for r in d["results"]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.results:
            w.writerow([
                r.dataset, r.method, r.protocol, r.param,
                "" if r.dim is None else r.dim,
                "" if r.dim_requested is None else r.dim_requested,
                f"{r.corruption:.4f}", f"{r.accuracy_mean:.4f}", f"{r.accuracy_std:.4f}",
                r.n_splits, r.failures, json.dumps(_summarize_params(r.hyperparameters)),
                "" if r.wall_time is None else f"{r.wall_time:.4f}",
            ])
        return buf.getvalue()

    def row(self, dataset=None, method=None, **match) -> ResultRow:
        for r in self.results:
            if dataset is not None and r.dataset != dataset:
                continue
            if method is not None and r.method != method:
                continue
            if all(getattr(r, k) == v for k, v in match.items()):
                return r
        raise KeyError(f"no result for dataset={dataset} method={method} {match}")


def _summarize_params(hp: list[dict]) -> dict:
    """Distinct values chosen for each hyperparameter across splits."""
    out = {}
    for d in hp:
        for k, v in d.items():
            out.setdefault(k, [])
            if v not in out[k]:
                out[k].append(v)
    return out


def emit_report(report: BenchmarkReport, fmt: str, path) -> None:
    """Write ``report`` as ``csv`` (4-decimal floats) or ``json`` (full precision)."""
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    Path(path).write_text(text)


def accuracy_stats(accs) -> tuple[float, float]:
    a = np.asarray(accs, dtype=float)
    std = float(a.std(ddof=STD_DDOF)) if a.size > STD_DDOF else 0.0
    return float(a.mean()), std


def _classify_all(clf, Y: np.ndarray, n_jobs: int, record: bool):
    """Predict every column of ``Y``; failures come back as ``None``."""

    def one(i):
        try:
            p = clf.predict(Y[:, i])
        except (ASRCError, np.linalg.LinAlgError, FloatingPointError) as exc:
            log.warning("%s failed on query %d: %s", clf.name, i, exc)
            return None
        return (p.class_id, p.residuals.tolist()) if record else p.class_id

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as ex:
            return list(ex.map(one, range(Y.shape[1])))
    return [one(i) for i in range(Y.shape[1])]


def _accuracy(preds, truth) -> tuple[float, int]:
    failures = sum(p is None for p in preds)
    ids = [(p[0] if isinstance(p, tuple) else p) for p in preds]
    correct = sum(1 for p, t in zip(ids, truth) if p is not None and p == t)
    return correct / len(truth), failures


def _build(method, params, opts):
    if method == "asrc":
        return make_classifier("asrc", opts=opts, **params)
    return make_classifier(method, **params)


def _select(method, grid, train: LabeledDataset, cfg: BenchmarkConfig, opts, seed):
    if len(grid) == 1 or cfg.selection == "first":
        return grid[0]
    inner = holdout(train.labels, cfg.validation_fraction, seed)
    if inner.test.size == 0:
        return grid[0]
    tr, va = train.subset(inner.train), train.subset(inner.test)
    best, best_acc = grid[0], -1.0
    for params in grid:
        clf = _build(method, params, opts).fit(tr.as_dictionary())
        acc, _ = _accuracy(_classify_all(clf, va.features, cfg.n_jobs, False), va.labels)
        if acc > best_acc:
            best, best_acc = params, acc
    return best


def _splits(cfg: BenchmarkConfig, ds: LabeledDataset, ds_index: int, param: int):
    for r in range(cfg.repeats):
        seed = [int(cfg.seed), ds_index, r]
        if cfg.protocol == "kfold":
            yield from kfold(ds, param, seed)
        else:
            yield split_per_class(ds, param, seed)


def _features(train: LabeledDataset, test: LabeledDataset, cfg, dim):
    Xtr, Xte = train.features, test.features
    if cfg.preprocess == "standardize":
        Xtr, Xte = standardize(Xtr, Xte)
    elif cfg.preprocess == "minmax":
        Xtr, Xte = minmax_scale(Xtr, Xte)
    used = None
    if dim is not None:
        used = int(min(dim, Xtr.shape[1] - 1, Xtr.shape[0]))
        if used != dim:
            log.info("clamping PCA dim %d to %d", dim, used)
        model = fit_pca(Xtr, used)
        Xtr, Xte = project(model, Xtr), project(model, Xte)
    return train.with_features(Xtr, None), test.with_features(Xte, None), used


def run_benchmark(cfg: BenchmarkConfig, include_timing: bool = False,
                  record_predictions: bool = False) -> BenchmarkReport:
    opts = cfg.solver_options()
    params_list = cfg.t if cfg.protocol == "per_class" else [cfg.k]
    rows: list[ResultRow] = []
    for ds_index, spec in enumerate(cfg.datasets):
        ds = load_dataset(spec, cfg.base_dir)
        preprocess = spec.get("preprocess", cfg.preprocess)
        ds_cfg = cfg if preprocess == cfg.preprocess else _replace(cfg, preprocess=preprocess)
        for param in params_list:
            acc = {}
            for split_id, split in enumerate(_splits(cfg, ds, ds_index, param)):
                train, test_clean = ds.subset(split.train), ds.subset(split.test)
                for p in cfg.corruption:
                    test = test_clean
                    if p > 0:
                        vr = ((float(train.features.min()), float(train.features.max()))
                              if cfg.corruption_range == "data" else cfg.corruption_range)
                        test = corrupt_dataset(test_clean, p, cfg.seed, vr, stream=split_id)
                    for dim in cfg.dims:
                        tr, te, used = _features(train, test, ds_cfg, dim)
                        for method in cfg.methods:
                            t0 = time.perf_counter()
                            chosen = _select(method, cfg.grid(method), tr, cfg, opts,
                                             [int(cfg.seed), ds_index, split_id, 1])
                            clf = _build(method, chosen, opts).fit(tr.as_dictionary())
                            preds = _classify_all(clf, te.features, cfg.n_jobs, record_predictions)
                            a, fails = _accuracy(preds, te.labels)
                            cell = acc.setdefault((dim, p, method), {
                                "accs": [], "hp": [], "fails": 0, "time": 0.0, "used": used,
                                "preds": []})
                            cell["accs"].append(a)
                            cell["hp"].append(chosen)
                            cell["fails"] += fails
                            cell["time"] += time.perf_counter() - t0
                            if record_predictions:
                                cell["preds"].append(preds)
            for dim in cfg.dims:
                for p in cfg.corruption:
                    for method in cfg.methods:
                        cell = acc[(dim, p, method)]
                        mean, std = accuracy_stats(cell["accs"])
                        rows.append(ResultRow(
                            dataset=ds.name, method=method, protocol=cfg.protocol,
                            param=int(param), dim=cell["used"], dim_requested=dim,
                            corruption=float(p), accuracy_mean=mean, accuracy_std=std,
                            split_accuracies=cell["accs"], hyperparameters=cell["hp"],
                            failures=cell["fails"],
                            wall_time=cell["time"] if include_timing else None,
                            predictions=cell["preds"] if record_predictions else None,
                        ))
    meta = {
        "config": cfg.describe(),
        "preprocessing": {
            "features": {spec.get("name", str(i)): PREPROCESS[spec.get("preprocess", cfg.preprocess)]
                         for i, spec in enumerate(cfg.datasets)},
            "dictionary": "unit l2 columns for asrc/src/crc; raw for nn/nfs",
            "query": "not normalized",
            "pca": "fit on training split only; dim clamped to n_train - 1",
        },
        "accuracy": "fraction correct; std uses ddof=%d over split accuracies" % STD_DDOF,
        "hyperparameter_selection": (
            f"best accuracy on a stratified {cfg.validation_fraction:g} holdout of each training split"
            if cfg.selection == "validation" else "first grid value"),
        "solver": asdict(opts),
        "tie_rule": "smallest class id",
    }
    return BenchmarkReport(cfg.name, int(cfg.seed), meta, rows)


def _replace(cfg: BenchmarkConfig, **changes) -> BenchmarkConfig:
    d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    d.update(changes)
    return BenchmarkConfig(**d)
