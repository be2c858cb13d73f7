"""Symmetric mid-tread uniform quantizer for residual planes.

One scale per plane, derived from the largest magnitude so the full
symbol range is always used: scale = max|v| / (2^(n-1) - 1).  Symbols are
integers in [-(2^(n-1)-1), +(2^(n-1)-1)]; zero always maps to symbol 0.
The scale is rounded to float32 before use because that is the precision
it is serialized at, so encoder and decoder share the exact same value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FormatError

MIN_BITS = 2
MAX_BITS = 8


def check_bits(bits: int) -> int:
    if not isinstance(bits, (int, np.integer)) or isinstance(bits, bool):
        raise ConfigError(f"bit width must be an integer, got {bits!r}")
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ConfigError(f"bit width {bits} outside [{MIN_BITS}, {MAX_BITS}]")
    return int(bits)


def symbol_limit(bits: int) -> int:
    """Largest symbol magnitude for a bit width: 2^(n-1) - 1."""
    return (1 << (bits - 1)) - 1


def _round_half_away(x: np.ndarray) -> np.ndarray:
    # np.round would round ties to even; the codec rounds them away from zero.
    return np.trunc(x + np.copysign(0.5, x))


@dataclass(frozen=True)
class QuantizedPlane:
    """Quantized values: integer symbols, one float32-exact scale."""

    symbols: np.ndarray
    scale: float
    bits: int
    count: int

    def __post_init__(self):
        check_bits(self.bits)
        sym = np.asarray(self.symbols, dtype=np.int16)
        sym.flags.writeable = False
        object.__setattr__(self, "symbols", sym)
        if self.count != sym.size:
            raise FormatError("symbol count does not match plane size")
        if not (self.scale > 0.0 and np.isfinite(self.scale)):
            raise FormatError(f"invalid scale {self.scale}")


def quantize(values, bits: int) -> QuantizedPlane:
    """Quantize a plane of reals to symbols plus a shared scale.

    Every element lands within scale/2 of its reconstruction.  A plane of
    zeros gets scale 1.0 and all-zero symbols.
    """
    bits = check_bits(bits)
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and not np.isfinite(arr).all():
        raise ValueError("non-finite value passed to quantizer")
    limit = symbol_limit(bits)
    peak = float(np.max(np.abs(arr))) if arr.size else 0.0
    scale = float(np.float32(peak / limit)) if peak > 0.0 else 1.0
    if scale <= 0.0:  # subnormal peak underflowing float32
        scale = 1.0
    symbols = _round_half_away(arr / scale)
    np.clip(symbols, -limit, limit, out=symbols)
    return QuantizedPlane(symbols.astype(np.int16), scale, bits, arr.size)


def dequantize(plane: QuantizedPlane) -> np.ndarray:
    """Map symbols back to reals: symbol * scale, in float64."""
    limit = symbol_limit(plane.bits)
    sym = plane.symbols
    if sym.size and int(np.max(np.abs(sym))) > limit:
        raise FormatError(f"symbol out of range for {plane.bits}-bit plane")
    return sym.astype(np.float64) * plane.scale
