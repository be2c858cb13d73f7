"""Reference selection for inter-layer kernel prediction.

A kernel at layer i is predicted from a kernel in an earlier layer.  FSS
searches every kernel of layers 0..i-1 for the smallest L1 distance, LSS
searches only layer i-1, and ILL skips the search entirely and takes the
collocated kernel v = j mod c_{i-1}.  Distance ties are broken toward the
smallest source layer, then the smallest kernel index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PredictionError
from .modes import Mode
from .weightstore import KERNEL_SIZE


def l1_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (KERNEL_SIZE,) or b.shape != (KERNEL_SIZE,):
        raise PredictionError("l1_distance expects two 9-element kernels")
    return float(np.abs(a - b).sum())


def collocated_index(j: int, c_prev: int) -> int:
    """Kernel index in the previous layer that a collocated prediction uses."""
    if c_prev < 1:
        raise PredictionError("previous layer must hold at least one kernel")
    if j < 0:
        raise PredictionError("kernel index must be non-negative")
    return j % c_prev


def compute_residual(target, reference) -> np.ndarray:
    """Element-wise target - reference, the exact inverse of adding reference."""
    target = np.asarray(target, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    return target - reference


def best_sources(context_layers, targets: np.ndarray):
    """Vectorized L1 argmin of each target over a stack of candidate layers.

    context_layers: sequence of (c_u, 9) arrays ordered by layer.
    targets: (m, 9) array.
    Returns (u, v) integer arrays of length m.  First-minimum semantics of
    argmin over candidates flattened in (layer, kernel) order implement
    the smallest-(u, v) tie break.
    """
    stack = np.concatenate([np.asarray(a, dtype=np.float64) for a in context_layers])
    dists = np.abs(targets[:, None, :] - stack[None, :, :]).sum(axis=2)
    flat = dists.argmin(axis=1)
    counts = np.array([a.shape[0] for a in context_layers])
    bounds = np.cumsum(counts)
    u = np.searchsorted(bounds, flat, side="right")
    v = flat - (bounds[u] - counts[u])
    return u.astype(np.int64), v.astype(np.int64)


def find_best_prediction(context, target, i: int, mode: Mode):
    """Pick the (source layer u, kernel v) minimizing L1 distance to target.

    context holds the candidate layers 0..i-1 (reconstructed kernels when
    called from the encoder, raw weights when called for analysis).
    """
    if i <= 0:
        raise PredictionError("layer 0 has no earlier layers to predict from")
    if len(context) < i:
        raise PredictionError(f"context holds {len(context)} layers, need {i}")
    if mode == Mode.FSS:
        layers = [context[u] for u in range(i)]
        base = 0
    elif mode == Mode.LSS:
        layers = [context[i - 1]]
        base = i - 1
    else:
        raise PredictionError(f"mode {mode} does not search for references")
    target = np.asarray(target, dtype=np.float64).reshape(1, KERNEL_SIZE)
    u, v = best_sources(layers, target)
    return base + int(u[0]), int(v[0])


@dataclass(frozen=True)
class PredictionRecord:
    """One coded kernel's provenance: where its reference lives."""

    target_layer: int
    target_kernel: int
    source_layer: int
    source_kernel: int

    def __post_init__(self):
        if not 0 <= self.source_layer < self.target_layer:
            raise PredictionError(
                f"source layer {self.source_layer} not earlier than "
                f"target layer {self.target_layer}"
            )
        if self.target_kernel < 0 or self.source_kernel < 0:
            raise PredictionError("kernel indices must be non-negative")
