"""MSB-first bit packing helpers.

Streams are packed most-significant-bit first and zero-padded to a byte
boundary, so a stream is fully described by its payload bytes plus an
exact bit count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormatError


@dataclass(frozen=True)
class BitString:
    """An immutable bit sequence: packed payload plus exact bit length."""

    data: bytes
    nbits: int

    def __post_init__(self):
        if self.nbits < 0:
            raise FormatError("negative bit length")
        if len(self.data) != (self.nbits + 7) // 8:
            raise FormatError(
                f"payload holds {len(self.data)} bytes but {self.nbits} bits were declared"
            )

    def check_padding(self):
        """Reject nonzero bits in the final partial byte."""
        tail = self.nbits % 8
        if tail and (self.data[-1] & ((1 << (8 - tail)) - 1)):
            raise FormatError("nonzero padding bits after end of stream")

    @staticmethod
    def empty() -> "BitString":
        return BitString(b"", 0)


class BitWriter:
    """Accumulates values MSB-first into a byte buffer."""

    def __init__(self):
        self._buf = bytearray()
        self._cur = 0
        self._n = 0
        self.bits_written = 0

    def write(self, value: int, nbits: int):
        if nbits < 0 or (nbits == 0 and value != 0):
            raise ValueError("value does not fit in the declared width")
        if value < 0 or (nbits < value.bit_length()):
            raise ValueError("value does not fit in the declared width")
        for shift in range(nbits - 1, -1, -1):
            self._cur = (self._cur << 1) | ((value >> shift) & 1)
            self._n += 1
            if self._n == 8:
                self._buf.append(self._cur)
                self._cur = 0
                self._n = 0
        self.bits_written += nbits

    def finish(self) -> BitString:
        """Zero-pad to a byte boundary and return the packed stream."""
        if self._n:
            self._buf.append(self._cur << (8 - self._n))
            self._cur = 0
            self._n = 0
        return BitString(bytes(self._buf), self.bits_written)


class BitReader:
    """Reads MSB-first values back out of a BitString."""

    def __init__(self, bits: BitString):
        self._data = bits.data
        self._nbits = bits.nbits
        self._pos = 0

    @property
    def bits_consumed(self) -> int:
        return self._pos

    def read(self, nbits: int) -> int:
        if self._pos + nbits > self._nbits:
            raise FormatError("bit stream exhausted")
        value = 0
        pos = self._pos
        for _ in range(nbits):
            byte = self._data[pos >> 3]
            value = (value << 1) | ((byte >> (7 - (pos & 7))) & 1)
            pos += 1
        self._pos = pos
        return value

    def expect_exhausted(self):
        if self._pos != self._nbits:
            raise FormatError(
                f"stream declared {self._nbits} bits but {self._pos} were consumed"
            )
