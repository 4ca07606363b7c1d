"""``bench`` command line entry point.

Exit codes: 0 success, 1 config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .classifiers import make_classifier
from .errors import ASRCError, ConfigError, DataError
from .experiments import (BenchmarkConfig, corrupt_dataset, emit_report, load_csv,
                          load_image_matrix, run_benchmark, save_image_matrix,
                          synth_face_like)
from .experiments.data import LabeledDataset
from .types import SolverOptions

log = logging.getLogger("asrc")


def _load(path, label_column):
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    if path.suffix.lower() == ".csv":
        return load_csv(path, label_column)
    return load_image_matrix(path)


def _label_arg(s):
    try:
        return int(s)
    except ValueError:
        return s


def cmd_run(args):
    cfg = BenchmarkConfig.from_file(args.config)
    if args.jobs:
        cfg.n_jobs = args.jobs
    report = run_benchmark(cfg, include_timing=args.timing)
    out = Path(args.out)
    emit_report(report, "json" if out.suffix == ".json" else "csv", out)
    if args.json:
        emit_report(report, "json", args.json)
    for r in report.results:
        print(f"{r.dataset:20s} {r.method:5s} {r.protocol}={r.param:<3d} dim={r.dim} "
              f"p={r.corruption:.2f} acc={100 * r.accuracy_mean:6.2f} +- {100 * r.accuracy_std:5.2f}")


def cmd_corrupt(args):
    ds = _load(args.dataset, args.label_column)
    if args.range == "data":
        vr = (float(ds.features.min()), float(ds.features.max()))
    else:
        vr = tuple(float(v) for v in args.range.split(","))
    out = corrupt_dataset(ds, args.fraction, args.seed, vr)
    dest = Path(args.out or f"{Path(args.dataset).stem}-corrupt{args.fraction:g}"
                             f"{Path(args.dataset).suffix or '.img'}")
    _save(out, dest)
    print(dest)


def _save(ds: LabeledDataset, dest: Path):
    if dest.suffix.lower() == ".csv":
        with dest.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"f{i}" for i in range(ds.n_features)] + ["class"])
            for i in range(ds.n_samples):
                w.writerow([repr(float(v)) for v in ds.features[:, i]] + [int(ds.labels[i])])
    else:
        save_image_matrix(ds, dest)


def cmd_classify(args):
    D = _load(args.dict, args.label_column)
    Q = _load(args.query, args.label_column)
    if Q.n_features != D.n_features:
        raise DataError(f"query dim {Q.n_features} != dictionary dim {D.n_features}")
    params = {}
    if args.method == "asrc":
        params["opts"] = SolverOptions(lam=args.lam)
    elif args.method == "src":
        params["lambda"] = args.lam
    elif args.method == "crc":
        params["sigma"] = args.sigma
    clf = make_classifier(args.method, **params).fit(D.as_dictionary())
    correct = 0
    for i in range(Q.n_samples):
        p = clf.predict(Q.features[:, i])
        rec = {"query": i, "class": D.label_names[p.class_id] if D.label_names else p.class_id,
               "residuals": [round(float(r), 10) for r in p.residuals]}
        if p.coding is not None:
            rec["converged"] = bool(p.coding.converged)
        truth = Q.label_names[Q.labels[i]] if Q.label_names else int(Q.labels[i])
        rec["true"] = truth
        correct += rec["class"] == truth
        print(json.dumps(rec, default=_jsonable))
    print(f"accuracy {correct}/{Q.n_samples}", file=sys.stderr)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def cmd_properties(args):
    from .properties import run_all
    checks = run_all(args.seed)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    return 0 if all(c.passed for c in checks) else 3


def cmd_synth(args):
    ds = synth_face_like(args.classes, args.per_class, args.dim, args.rho, args.seed, args.noise)
    dest = Path(args.out)
    if dest.suffix.lower() != ".csv":
        if ds.geometry is None:
            raise DataError("image output needs a square --dim")
        lo, hi = ds.features.min(), ds.features.max()
        ds = ds.with_features((ds.features - lo) / (hi - lo))
    _save(ds, dest)
    print(dest)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a benchmark config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True, help="report path (.csv or .json)")
    r.add_argument("--json", help="also write the full JSON report here")
    r.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identity)")
    r.add_argument("--jobs", type=int, default=0)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("corrupt", help="corrupt a fraction of pixels of every image")
    c.add_argument("--dataset", required=True)
    c.add_argument("--fraction", type=float, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--range", default="0,1", help="'lo,hi' or 'data'")
    c.add_argument("--label-column", type=_label_arg, default=-1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_corrupt)

    k = sub.add_parser("classify", help="classify queries against a dictionary")
    k.add_argument("--dict", required=True)
    k.add_argument("--query", required=True)
    k.add_argument("--method", default="asrc", choices=["asrc", "src", "crc", "nn", "nfs"])
    k.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    k.add_argument("--sigma", type=float, default=1e-2)
    k.add_argument("--label-column", type=_label_arg, default=-1)
    k.set_defaults(func=cmd_classify)

    pr = sub.add_parser("properties", help="run the regularizer/prox invariant checks")
    pr.add_argument("--seed", type=int, default=0)
    pr.set_defaults(func=cmd_properties)

    s = sub.add_parser("synth", help="write a synthetic face-like dataset")
    s.add_argument("--classes", type=int, default=15)
    s.add_argument("--per-class", type=int, default=8)
    s.add_argument("--dim", type=int, default=256)
    s.add_argument("--rho", type=float, default=0.2)
    s.add_argument("--noise", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="synth.csv")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except ASRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code if getattr(args, "command", "") == "run" else DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
