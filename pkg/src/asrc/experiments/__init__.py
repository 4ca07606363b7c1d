"""Benchmark machinery: datasets, splits, corruption, runner and reports."""

from .benchmark import BenchmarkConfig, BenchmarkReport, emit_report, run_benchmark
from .corruption import corrupt_dataset, corrupt_pixels
from .data import (LabeledDataset, load_csv, load_dataset, load_image_matrix,
                   save_image_matrix, synth_face_like)
from .splits import kfold, split_per_class

__all__ = [
    "BenchmarkConfig", "BenchmarkReport", "LabeledDataset", "corrupt_dataset",
    "corrupt_pixels", "emit_report", "kfold", "load_csv", "load_dataset",
    "load_image_matrix", "run_benchmark", "save_image_matrix", "split_per_class",
    "synth_face_like",
]
