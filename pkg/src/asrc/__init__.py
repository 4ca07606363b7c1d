"""Adaptive sparse representation classification with trace-Lasso coding."""

from .classifiers import (ASRC, CRC, NFS, NN, SRC, Prediction, asrc_classify, class_residuals,
                          crc_classify, make_classifier, nfs_classify, nn_classify, src_classify)
from .features import PcaModel, fit_pca, project
from .prox import correlation_regularizer, soft_threshold, svt, trace_norm
from .solver import precompute_gram, solve_trace_lasso
from .types import (CodingResult, Dictionary, SolverOptions, class_slice, normalize_columns)

__version__ = "0.1.0"
