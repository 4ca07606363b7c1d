"""Dataset containers, loaders and the synthetic face-like generator.

Packed image-matrix file layout (all integers little-endian)::

    offset  size      field
    0       8         magic b"ASRCIMG1"
    8       4         N  (uint32, number of images)
    12      4         h  (uint32, rows per image)
    16      4         w  (uint32, columns per image)
    20      N*h*w     pixels, uint8, image after image, each row-major
    ...     4*N       labels, int32, one per image

Pixels are scaled by 1/255 on load.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (DataError, DimensionMismatch, EmptyDataset, InvalidInput,
                      MissingValue, ParseError, TruncatedFile)
from ..types import Dictionary, densify_labels

IMAGE_MAGIC = b"ASRCIMG1"
_HEADER = struct.Struct("<8sIII")
MISSING_TOKENS = {"", "?", "na", "nan", "null", "none"}


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Samples as columns of ``features`` (m x N) with dense class ids."""

    features: np.ndarray
    labels: np.ndarray
    geometry: tuple[int, int] | None = None
    name: str = "dataset"
    label_names: list = field(default_factory=list)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels).astype(np.int64)
        if X.ndim != 2:
            raise InvalidInput("features must be a 2-D matrix")
        if y.shape != (X.shape[1],):
            raise DimensionMismatch(f"{y.shape[0]} labels for {X.shape[1]} samples")
        if self.geometry is not None:
            h, w = self.geometry
            if h * w != X.shape[0]:
                raise DimensionMismatch(f"geometry {h}x{w} does not match {X.shape[0]} features")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset(self.features[:, idx], self.labels[idx], self.geometry,
                              self.name, self.label_names)

    def with_features(self, features, geometry="keep") -> "LabeledDataset":
        geom = self.geometry if geometry == "keep" else geometry
        return LabeledDataset(features, self.labels, geom, self.name, self.label_names)

    def as_dictionary(self) -> Dictionary:
        return Dictionary(self.features, self.labels)

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (self.geometry == other.geometry
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.features, other.features))


def load_csv(path, label_column=-1, name: str | None = None) -> LabeledDataset:
    """Read a numeric CSV with one label column.

    ``label_column`` is a header name or a (possibly negative) column index.
    A header row is detected when its non-label cells are not numeric.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyDataset(f"{path} is empty")

    header = None
    if not _looks_numeric(rows[0], label_column):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")

    ncol = len(header) if header else len(rows[0])
    if isinstance(label_column, str):
        if header is None or label_column not in header:
            raise ParseError(f"label column {label_column!r} not found in header")
        lab = header.index(label_column)
    else:
        lab = int(label_column) % ncol

    feats = np.empty((len(rows), ncol - 1))
    raw_labels = []
    first_row = 2 if header else 1
    for i, row in enumerate(rows):
        rowno = i + first_row
        if len(row) != ncol:
            raise ParseError(f"expected {ncol} fields, got {len(row)}", row=rowno)
        j_out = 0
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == lab:
                if cell.lower() in MISSING_TOKENS:
                    raise MissingValue("missing label", row=rowno, col=j + 1)
                raw_labels.append(cell)
                continue
            if cell.lower() in MISSING_TOKENS:
                raise MissingValue("missing value", row=rowno, col=j + 1)
            try:
                feats[i, j_out] = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value {cell!r}", row=rowno, col=j + 1) from None
            j_out += 1
    labels, names = densify_labels(_maybe_numeric(raw_labels))
    return LabeledDataset(feats.T, labels, None, name or path.stem, names)


def _looks_numeric(row, label_column) -> bool:
    cells = [c.strip() for c in row]
    if isinstance(label_column, str):
        return label_column not in cells and all(_isfloat(c) for c in cells)
    lab = int(label_column) % len(cells)
    return all(_isfloat(c) or c.lower() in MISSING_TOKENS for j, c in enumerate(cells) if j != lab)


def _isfloat(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _maybe_numeric(values: list[str]):
    if all(_isfloat(v) for v in values):
        return np.array([float(v) for v in values])
    return np.array(values)


def save_image_matrix(ds: LabeledDataset, path) -> None:
    """Write ``ds`` in the packed format; features must lie in [0, 1]."""
    if ds.geometry is None:
        raise DataError("dataset has no image geometry")
    X = ds.features
    if X.size and (X.min() < 0 or X.max() > 1):
        raise DataError("pixel values must lie in [0, 1]")
    h, w = ds.geometry
    pixels = np.rint(X.T * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(IMAGE_MAGIC, ds.n_samples, h, w))
        fh.write(pixels.tobytes())
        fh.write(ds.labels.astype("<i4").tobytes())


def load_image_matrix(path, name: str | None = None) -> LabeledDataset:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncatedFile(f"{path}: header needs {_HEADER.size} bytes, file has {len(blob)}")
    magic, n, h, w = _HEADER.unpack_from(blob)
    if magic != IMAGE_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    npix = n * h * w
    need = _HEADER.size + npix + 4 * n
    if len(blob) < need:
        raise TruncatedFile(f"{path}: expected {need} bytes, file has {len(blob)}")
    pixels = np.frombuffer(blob, np.uint8, npix, _HEADER.size).reshape(n, h * w)
    raw = np.frombuffer(blob, "<i4", n, _HEADER.size + npix)
    labels, names = densify_labels(raw)
    return LabeledDataset(pixels.T / 255.0, labels, (h, w), name or path.stem, names)


def synth_face_like(n_classes: int, per_class: int, m: int, rho: float, seed=0,
                    noise: float = 0.1) -> LabeledDataset:
    """Synthetic stand-in for a face database with tunable class correlation.

    Each sample is ``(1 - rho) * u_k + rho * s + noise * g / sqrt(m)`` with
    ``u_k`` a random unit identity vector for class ``k``, ``s`` a unit
    vector shared by every class and ``g`` standard Gaussian.  ``rho = 0``
    gives nearly orthogonal classes, ``rho = 1`` collapses all classes onto
    ``s``.
    """
    if not 0 <= rho <= 1:
        raise InvalidInput("rho must lie in [0, 1]")
    if n_classes < 1 or per_class < 1 or m < 1:
        raise InvalidInput("n_classes, per_class and m must be positive")
    rng = np.random.default_rng(seed)
    ids = rng.standard_normal((m, n_classes))
    ids /= np.linalg.norm(ids, axis=0)
    shared = rng.standard_normal(m)
    shared /= np.linalg.norm(shared)
    labels = np.repeat(np.arange(n_classes), per_class)
    base = (1 - rho) * ids[:, labels] + rho * shared[:, None]
    X = base + noise * rng.standard_normal(base.shape) / math.sqrt(m)
    side = math.isqrt(m)
    geometry = (side, side) if side * side == m else None
    return LabeledDataset(X, labels, geometry, f"synth-K{n_classes}-rho{rho:g}",
                          list(range(n_classes)))


def load_dataset(spec: dict, base_dir: Path | None = None) -> LabeledDataset:
    """Load from a config entry: ``format`` is ``csv``, ``image`` or ``synth``."""
    fmt = spec.get("format")
    if fmt is None:
        fmt = "synth" if "path" not in spec else ("csv" if str(spec["path"]).endswith(".csv") else "image")
    name = spec.get("name")
    if fmt == "synth":
        return _named(synth_face_like(int(spec["classes"]), int(spec["per_class"]), int(spec["dim"]),
                                      float(spec["rho"]), spec.get("seed", 0),
                                      float(spec.get("noise", 0.1))), name)
    path = Path(spec["path"])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    if fmt == "csv":
        return load_csv(path, spec.get("label_column", -1), name)
    if fmt == "image":
        return load_image_matrix(path, name)
    raise DataError(f"unknown dataset format {fmt!r}")


def _named(ds: LabeledDataset, name):
    if name is None:
        return ds
    return LabeledDataset(ds.features, ds.labels, ds.geometry, name, ds.label_names)


def standardize(train: np.ndarray, *others: np.ndarray):
    """Z-score rows (features) using statistics of ``train`` only.

    Constant features get unit scale so they map to zero instead of NaN.
    """
    mean = train.mean(axis=1, keepdims=True)
    std = train.std(axis=1, keepdims=True)
    std[std < 1e-12] = 1.0
    return tuple((a - mean) / std for a in (train, *others))


def minmax_scale(train: np.ndarray, *others: np.ndarray, lo: float = -1.0, hi: float = 1.0):
    """Map each feature (row) of ``train`` linearly onto ``[lo, hi]``.

    Other matrices reuse the training min/max, so they may fall slightly
    outside the interval.  Constant features map to the interval midpoint.
    """
    fmin = train.min(axis=1, keepdims=True)
    span = train.max(axis=1, keepdims=True) - fmin
    const = span < 1e-12
    span[const] = 1.0
    out = []
    for a in (train, *others):
        z = lo + (hi - lo) * (a - fmin) / span
        z[np.broadcast_to(const, z.shape)] = 0.5 * (lo + hi)
        out.append(z)
    return tuple(out)
