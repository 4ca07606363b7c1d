import json
from pathlib import Path

import numpy as np
import pytest

from asrc.errors import (ConfigError, EmptyDataset, InsufficientSamples, InvalidFoldCount,
                         MissingValue, ParseError, TruncatedFile)
from asrc.experiments import (BenchmarkConfig, BenchmarkReport, run_benchmark, split_per_class,
                              synth_face_like)
from asrc.experiments.corruption import corrupt_dataset, corrupt_pixels, n_corrupted
from asrc.experiments.data import (LabeledDataset, load_csv, load_dataset, load_image_matrix,
                                   minmax_scale, save_image_matrix, standardize)
from asrc.experiments.splits import holdout, kfold

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_with_header(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,label\n1,2,x\n3,4,y\n5,6,x\n"), "label")
    assert ds.features.shape == (2, 3)
    assert list(ds.labels) == [0, 1, 0] and list(ds.label_names) == ["x", "y"]
    assert np.array_equal(ds.features[:, 1], [3, 4])


def test_load_csv_headerless_first_column_label(tmp_path):
    ds = load_csv(write(tmp_path, "2,0.5,1\n1,1.5,2\n"), 0)
    assert ds.features.shape == (2, 2) and list(ds.label_names) == [1, 2]


def test_load_csv_errors(tmp_path):
    with pytest.raises(EmptyDataset):
        load_csv(write(tmp_path, ""))
    with pytest.raises(EmptyDataset):
        load_csv(write(tmp_path, "a,b,c\n"))
    with pytest.raises(MissingValue) as exc:
        load_csv(write(tmp_path, "a,b,c\n1,?,0\n"))
    assert (exc.value.row, exc.value.col) == (2, 2)
    with pytest.raises(ParseError) as exc:
        load_csv(write(tmp_path, "1,2,0\n1,zz,0\n"))
    assert exc.value.row == 2
    with pytest.raises(ParseError):
        load_csv(write(tmp_path, "1,2,0\n1,0\n"))


def test_bundled_uci_files():
    iono = load_csv(ROOT / "data/uci/ionosphere.csv", "class")
    assert iono.features.shape == (34, 351) and iono.n_classes == 2
    heart = load_csv(ROOT / "data/uci/heart_cleveland.csv", "class")
    assert heart.features.shape == (13, 297) and heart.n_classes == 2


def test_image_round_trip_and_truncation(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.integers(0, 256, (16, 5)) / 255.0
    ds = LabeledDataset(X, np.array([0, 0, 1, 1, 2]), (4, 4), "img", [0, 1, 2])
    p = tmp_path / "x.img"
    save_image_matrix(ds, p)
    back = load_image_matrix(p)
    assert np.allclose(back.features, X) and back.geometry == (4, 4)
    assert list(back.labels) == [0, 0, 1, 1, 2]
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(TruncatedFile):
        load_image_matrix(p)
    p.write_bytes(b"NOPE" * 8)
    with pytest.raises(ParseError):
        load_image_matrix(p)


def test_split_per_class_counts_and_uniformity():
    labels = np.repeat(np.arange(3), 6)
    sp = split_per_class(labels, 2, seed=0)
    assert np.bincount(labels[sp.train]).tolist() == [2, 2, 2]
    assert set(sp.train).isdisjoint(sp.test) and len(sp.train) + len(sp.test) == 18
    # Each sample should be chosen for training about t/n_k = 1/3 of the time.
    hits = np.zeros(18)
    for s in range(3000):
        hits[split_per_class(labels, 2, seed=s).train] += 1
    assert np.allclose(hits / 3000, 1 / 3, atol=0.04)
    with pytest.raises(InsufficientSamples):
        split_per_class(labels, 6, seed=0)


def test_kfold_partition_and_stratification():
    labels = np.array([0] * 23 + [1] * 17 + [2] * 5)
    folds = kfold(labels, 10, seed=3)
    tests = np.concatenate([f.test for f in folds])
    assert sorted(tests) == list(range(45))
    sizes = [len(f.test) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    for c, n in ((0, 23), (1, 17), (2, 5)):
        per = [np.sum(labels[f.test] == c) for f in folds]
        assert max(per) - min(per) <= 1 and sum(per) == n
    with pytest.raises(InvalidFoldCount):
        kfold(labels, 1, seed=0)


def test_holdout_keeps_one_for_training():
    sp = holdout(np.array([0, 1, 1, 1, 1, 1]), 0.4, seed=0)
    assert 0 in sp.train and len(sp.test) == 2


def test_corruption_count_audit():
    rng = np.random.default_rng(0)
    assert n_corrupted(0.29, 100) == 29 and n_corrupted(1.0, 7) == 7
    x = np.full(100, 5.0)
    out = corrupt_pixels(x, 0.3, rng, (0, 1))
    assert np.sum(out != 5.0) == 30 and np.all((out[out != 5.0] >= 0) & (out[out != 5.0] <= 1))
    assert np.array_equal(corrupt_pixels(x, 0.0, rng), x)


def test_corrupt_dataset_is_order_independent():
    ds = synth_face_like(2, 3, 16, 0.2, seed=0)
    full = corrupt_dataset(ds, 0.5, seed=4)
    part = corrupt_dataset(ds.subset(np.array([3, 4])), 0.5, seed=4)
    assert not np.array_equal(full.features[:, 3], part.features[:, 0])  # stream index = column
    again = corrupt_dataset(ds, 0.5, seed=4)
    assert np.array_equal(full.features, again.features)


def test_synth_correlation_knob():
    def mean_cross_cos(rho):
        ds = synth_face_like(8, 4, 64, rho, seed=1, noise=0.0)
        X = ds.features / np.linalg.norm(ds.features, axis=0)
        C = X.T @ X
        other = ds.labels[:, None] != ds.labels[None, :]
        return C[other].mean()
    assert mean_cross_cos(0.05) < 0.2 < 0.9 < mean_cross_cos(0.95)
    assert synth_face_like(2, 2, 16, 0.1).geometry == (4, 4)


def test_scaling_uses_training_statistics():
    tr = np.array([[0.0, 2.0, 4.0], [1.0, 1.0, 1.0]])
    te = np.array([[6.0], [3.0]])
    a, b = minmax_scale(tr, te)
    assert np.allclose(a[0], [-1, 0, 1]) and b[0, 0] == pytest.approx(2.0)
    assert np.all(a[1] == 0)
    z, zt = standardize(tr, te)
    assert np.allclose(z.mean(axis=1), 0) and np.all(np.isfinite(zt))


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        BenchmarkConfig.from_dict({"datasets": [], "methods": ["asrc"]})
    with pytest.raises(ConfigError):
        BenchmarkConfig.from_dict({"datasets": [{"format": "synth"}], "methods": ["svm"]})
    cfg = BenchmarkConfig.from_file(ROOT / "configs/toy.json")
    assert len(cfg.grid("asrc")) == 2
    assert BenchmarkConfig.from_file(ROOT / "configs/uci.toml").preprocess == "minmax"


def test_toy_benchmark_round_trips_and_is_deterministic(tmp_path):
    cfg = BenchmarkConfig.from_file(ROOT / "configs/toy.json")
    report = run_benchmark(cfg)
    again = run_benchmark(BenchmarkConfig.from_file(ROOT / "configs/toy.json"))
    assert report.to_json() == again.to_json()
    assert report.row("synth", "asrc", dim=None).accuracy_mean == 1.0
    back = BenchmarkReport.from_dict(json.loads(report.to_json()))
    assert back.to_json() == report.to_json()
    lines = report.to_csv().strip().splitlines()
    assert len(lines) == 1 + len(report.results)
    assert "wall_time" not in report.to_json()
    assert run_benchmark(cfg, include_timing=True).results[0].wall_time is not None


def test_load_dataset_spec(tmp_path):
    ds = load_dataset({"format": "synth", "classes": 2, "per_class": 3, "dim": 9, "rho": 0.1,
                       "name": "s"})
    assert ds.name == "s" and ds.features.shape == (9, 6)
