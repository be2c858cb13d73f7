"""Container for per-layer 3x3 depthwise convolution kernels.

A weight store is an ordered list of layers; layer i holds c_i kernels of
9 scalars each (3x3, row-major).  The serialized container is
little-endian:

    magic "ILWP" | version u16 = 1 | reserved u16 = 0 | layer count L u32
    | L x kernel count u32 | per layer: c_i * 9 float32, kernel-major

Weights are stored as 32-bit floats on disk; in memory they are kept as
float64 so that residual and reconstruction arithmetic is exact.  The
model name is carried out-of-band (by filename), never serialized.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

MAGIC = b"ILWP"
VERSION = 1
KERNEL_SIZE = 9


def _as_layer(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != KERNEL_SIZE:
        raise FormatError(f"layer must have shape (c, {KERNEL_SIZE}), got {arr.shape}")
    if arr.shape[0] < 1:
        raise FormatError("layer must hold at least one kernel")
    if not np.isfinite(arr).all():
        raise ValueError("non-finite weight value")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WeightStore:
    """Immutable stack of depthwise layers.

    layers: one (c_i, 9) float64 array per layer, kernel-major.
    model_name: free-text label, not serialized.
    """

    layers: tuple
    model_name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(_as_layer(a) for a in self.layers))

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def layer_counts(self) -> tuple:
        return tuple(int(a.shape[0]) for a in self.layers)

    @property
    def total_kernels(self) -> int:
        return sum(self.layer_counts)

    def kernel(self, i: int, j: int) -> np.ndarray:
        return self.layers[i][j]


def save_weight_store(store: WeightStore) -> bytes:
    """Serialize a store to container bytes.

    Raises FormatError for an empty store and ValueError if any weight
    does not survive the cast to float32.
    """
    if store.num_layers == 0:
        raise FormatError("cannot serialize a store with no layers")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HHI", VERSION, 0, store.num_layers)
    out += struct.pack(f"<{store.num_layers}I", *store.layer_counts)
    for layer in store.layers:
        with np.errstate(over="ignore"):  # overflow is checked explicitly
            as32 = layer.astype("<f4")
        if not np.isfinite(as32).all():
            raise ValueError("weight value overflows float32")
        out += as32.tobytes()
    return bytes(out)


def load_weight_store(data: bytes, model_name: str = "") -> WeightStore:
    """Parse container bytes produced by save_weight_store.

    The byte length must match the declared layer table exactly; anything
    truncated or trailing is rejected.
    """
    if len(data) < 12:
        raise FormatError("truncated container: missing header")
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}")
    version, reserved, num_layers = struct.unpack_from("<HHI", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if reserved != 0:
        raise FormatError("reserved header field must be zero")
    if num_layers == 0:
        raise FormatError("container declares zero layers")
    offset = 12
    if len(data) < offset + 4 * num_layers:
        raise FormatError("truncated container: missing layer table")
    counts = struct.unpack_from(f"<{num_layers}I", data, offset)
    offset += 4 * num_layers
    if any(c == 0 for c in counts):
        raise FormatError("layer with zero kernels")
    expected = offset + 4 * KERNEL_SIZE * sum(counts)
    if len(data) != expected:
        raise FormatError(
            f"container holds {len(data)} bytes, layer table requires {expected}"
        )
    layers = []
    for c in counts:
        n = 4 * KERNEL_SIZE * c
        plane = np.frombuffer(data[offset : offset + n], dtype="<f4")
        if not np.isfinite(plane).all():
            raise ValueError("non-finite weight value in container")
        layers.append(plane.astype(np.float64).reshape(c, KERNEL_SIZE))
        offset += n
    return WeightStore(tuple(layers), model_name)
