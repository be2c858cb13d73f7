"""Similarity and entropy diagnostics for weight stores.

These run on raw weights (no quantization) unless a function says
otherwise.  The heatmap and the smoothly-varying ratio both ask, for
every kernel, which earlier layer holds its nearest kernel in L1
distance; residual statistics get a Laplace fit and entropy estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError
from .predictor import best_sources
from .weightstore import WeightStore


@dataclass(frozen=True)
class SourceHeatmap:
    """Row per target layer i >= 1, column per source layer; rows sum to 100."""

    matrix: np.ndarray
    target_layers: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class LaplaceFit:
    mu: float
    b: float
    count: int


@dataclass(frozen=True)
class Histogram:
    """Counts over bins centered at integer multiples of bin_width."""

    centers: np.ndarray
    counts: np.ndarray
    bin_width: float


def prediction_source_heatmap(store: WeightStore) -> SourceHeatmap:
    """Tally, per target layer, where each kernel's nearest match lives.

    Entry [i-1][u] is the percentage of layer i's kernels whose full
    search lands in layer u.  Computed on the original weights.
    """
    L = store.num_layers
    if L < 2:
        raise AnalysisError("heatmap needs at least 2 layers")
    matrix = np.zeros((L - 1, L), dtype=np.float64)
    for i in range(1, L):
        u, _ = best_sources(store.layers[:i], store.layers[i])
        counts = np.bincount(u, minlength=L)
        matrix[i - 1] = 100.0 * counts / store.layers[i].shape[0]
    return SourceHeatmap(matrix, tuple(range(1, L)))


def svwh_ratio(store: WeightStore) -> float:
    """Fraction of kernels (layers i >= 2) whose best source is layer i-1.

    Layer 1 is excluded because it has only one possible source layer.
    """
    if store.num_layers < 3:
        raise AnalysisError("ratio needs at least 3 layers")
    hits = 0
    total = 0
    for i in range(2, store.num_layers):
        u, _ = best_sources(store.layers[:i], store.layers[i])
        hits += int((u == i - 1).sum())
        total += u.size
    return hits / total


def residual_histogram(values, bin_width: float) -> Histogram:
    """Bin values into buckets centered at integer multiples of bin_width."""
    if not bin_width > 0.0:
        raise AnalysisError(f"bin width must be positive, got {bin_width}")
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise AnalysisError("histogram needs at least one value")
    if not np.isfinite(arr).all():
        raise AnalysisError("non-finite value in histogram input")
    k = np.trunc(arr / bin_width + np.copysign(0.5, arr)).astype(np.int64)
    idx, counts = np.unique(k, return_counts=True)
    return Histogram(idx.astype(np.float64) * bin_width, counts, float(bin_width))


def fit_laplace(values) -> LaplaceFit:
    """Maximum-likelihood Laplace fit: mu = median, b = mean |x - mu|."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size < 2:
        raise AnalysisError("Laplace fit needs at least 2 values")
    if not np.isfinite(arr).all():
        raise AnalysisError("non-finite value in fit input")
    mu = float(np.median(arr))
    b = float(np.abs(arr - mu).mean())
    if b <= 0.0:
        raise AnalysisError("degenerate fit: all values identical")
    return LaplaceFit(mu, b, arr.size)


def laplace_entropy(b: float) -> float:
    """Differential entropy of a Laplace density in nats: ln(2b) + 1."""
    if not b > 0.0:
        raise ValueError(f"diversity must be positive, got {b}")
    return math.log(2.0 * b) + 1.0


def empirical_entropy(hist: dict) -> float:
    """Shannon entropy in bits of the distribution given by the counts."""
    if not hist:
        raise ValueError("entropy of an empty histogram is undefined")
    counts = np.array(list(hist.values()), dtype=np.float64)
    if (counts < 0).any() or counts.sum() == 0:
        raise ValueError("histogram counts must be non-negative and not all zero")
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())
