"""Canonical Huffman coding over integer symbol alphabets.

Only code lengths are stored; codes are reassigned canonically on both
sides, so the serialized table is just (symbol, length) pairs.  Canonical
assignment sorts symbols by (length, symbol value) and hands out codes
with ``code = (code + 1) << (next_length - length)`` between entries.
Tree construction breaks priority-queue ties by (count, symbol value)
ascending so the lengths are reproducible.  A single-symbol alphabet gets
code length 1.

Bit streams are packed MSB-first and zero-padded to a byte boundary.
"""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass, field

import numpy as np

from .bitio import BitString
from .errors import CodingError, FormatError

# Upper bound on a code length this codec will emit or accept.  Streams
# short enough to fit in memory cannot produce deeper canonical trees.
MAX_CODE_LENGTH = 64


def histogram(symbols) -> dict:
    """Count occurrences of each symbol value."""
    arr = np.asarray(symbols).ravel()
    values, counts = np.unique(arr, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def _code_lengths(hist: dict) -> dict:
    """Huffman code lengths from symbol counts, deterministic under ties."""
    for sym, count in hist.items():
        if count < 0:
            raise ValueError(f"symbol {sym} has negative count {count}")
    live = {sym: count for sym, count in hist.items() if count > 0}
    if not live:
        raise ValueError("cannot build a code for an empty histogram")
    if len(live) == 1:
        return {sym: 1 for sym in live}
    # Heap entries carry (count, tie key, leaf symbols).  Leaves are keyed
    # by (0, symbol) so equal counts resolve by symbol value; merged nodes
    # are keyed by creation order after all leaves.
    heap = [(count, (0, sym), (sym,)) for sym, count in live.items()]
    heapq.heapify(heap)
    depths = {sym: 0 for sym in live}
    serial = 0
    while len(heap) > 1:
        c1, _, s1 = heapq.heappop(heap)
        c2, _, s2 = heapq.heappop(heap)
        for sym in s1 + s2:
            depths[sym] += 1
        serial += 1
        heapq.heappush(heap, (c1 + c2, (1, serial), s1 + s2))
    return depths


def _canonical_codes(lengths: dict) -> dict:
    """Assign canonical codes: sort by (length, symbol), pack left to right."""
    order = sorted(lengths.items(), key=lambda kv: (kv[1], kv[0]))
    codes = {}
    code = 0
    prev_len = order[0][1]
    for sym, length in order:
        code <<= length - prev_len
        if code >> length:
            raise FormatError("code lengths violate the Kraft inequality")
        codes[sym] = code
        code += 1
        prev_len = length
    return codes


@dataclass(frozen=True)
class HuffmanTable:
    """Code lengths per symbol plus the canonical codes derived from them."""

    lengths: dict
    codes: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lengths:
            raise ValueError("table must cover at least one symbol")
        for sym, length in self.lengths.items():
            if not 1 <= length <= MAX_CODE_LENGTH:
                raise FormatError(f"code length {length} for symbol {sym} out of range")
        object.__setattr__(self, "lengths", dict(self.lengths))
        object.__setattr__(self, "codes", _canonical_codes(self.lengths))

    @property
    def symbols(self) -> list:
        return sorted(self.lengths)

    def total_bits(self, hist: dict) -> int:
        return sum(self.lengths[sym] * count for sym, count in hist.items())


def build_table(hist: dict) -> HuffmanTable:
    """Build a canonical table whose lengths are Huffman-optimal for hist."""
    return HuffmanTable(_code_lengths(hist))


def encode(symbols, table: HuffmanTable) -> BitString:
    """Concatenate the code of every symbol, MSB-first."""
    arr = np.asarray(symbols, dtype=np.int64).ravel()
    if arr.size == 0:
        return BitString.empty()
    alphabet = np.array(table.symbols, dtype=np.int64)
    idx = np.searchsorted(alphabet, arr)
    idx_ok = (idx < alphabet.size) & (alphabet[np.minimum(idx, alphabet.size - 1)] == arr)
    if not idx_ok.all():
        missing = int(arr[~idx_ok][0])
        raise CodingError(f"symbol {missing} not in table")
    lens = np.array([table.lengths[int(s)] for s in alphabet], dtype=np.int64)[idx]
    codes = np.array([table.codes[int(s)] for s in alphabet], dtype=np.uint64)[idx]
    # Ragged expansion: map every output bit position to its symbol.
    ends = np.cumsum(lens)
    total = int(ends[-1])
    pos = np.arange(total, dtype=np.int64)
    owner = np.searchsorted(ends, pos, side="right")
    within = pos - (ends[owner] - lens[owner])
    shift = (lens[owner] - 1 - within).astype(np.uint64)
    bits = ((codes[owner] >> shift) & np.uint64(1)).astype(np.uint8)
    return BitString(np.packbits(bits).tobytes(), total)


def _decode_tables(table: HuffmanTable):
    """Canonical decode structures: per-length first code and symbol runs."""
    by_len = {}
    for sym, length in table.lengths.items():
        by_len.setdefault(length, []).append(sym)
    lens = sorted(by_len)
    first_code = {}
    first_index = {}
    ordered = []
    code = 0
    prev = lens[0]
    for length in lens:
        code <<= length - prev
        first_code[length] = code
        first_index[length] = len(ordered)
        syms = sorted(by_len[length])
        ordered.extend(syms)
        code += len(syms)
        prev = length
    return lens, first_code, first_index, ordered


def decode(bits: BitString, table: HuffmanTable, count: int) -> np.ndarray:
    """Decode exactly count symbols; the stream must end exactly there.

    Raises FormatError if the bits run out early, do not resolve to a
    code, or extend past the last symbol.
    """
    if count < 0:
        raise FormatError("negative symbol count")
    bits.check_padding()
    if count == 0:
        if bits.nbits != 0:
            raise FormatError("bits present but zero symbols declared")
        return np.zeros(0, dtype=np.int16)
    lens, first_code, first_index, ordered = _decode_tables(table)
    max_len = lens[-1]
    # Dense prefix table over the first lut_bits bits for short codes.
    lut_bits = min(max_len, 12)
    lut = [None] * (1 << lut_bits)
    for length in lens:
        if length > lut_bits:
            break
        base = first_code[length]
        idx0 = first_index[length]
        span = 1 << (lut_bits - length)
        n_at_len = (first_index.get(_next_len(lens, length), len(ordered))) - idx0
        for k in range(n_at_len):
            start = (base + k) << (lut_bits - length)
            entry = (ordered[idx0 + k], length)
            for slot in range(start, start + span):
                lut[slot] = entry
    # 32-bit words, MSB-first, with sentinel zeros so peeks never run off.
    padded = bits.data + b"\x00" * (-len(bits.data) % 4 + 12)
    words = struct.unpack(f">{len(padded) // 4}I", padded)
    out = np.empty(count, dtype=np.int16)
    pos = 0
    window_w = max(max_len, lut_bits)
    for n in range(count):
        i = pos >> 5
        off = pos & 31
        window = (((words[i] << 64) | (words[i + 1] << 32) | words[i + 2])
                  >> (96 - window_w - off)) & ((1 << window_w) - 1)
        entry = lut[window >> (window_w - lut_bits)]
        if entry is None:
            sym = None
            for length in lens:
                if length <= lut_bits:
                    continue
                code = window >> (window_w - length)
                k = code - first_code[length]
                n_at_len = first_index.get(_next_len(lens, length), len(ordered)) - first_index[length]
                if 0 <= k < n_at_len:
                    sym = ordered[first_index[length] + k]
                    entry = (sym, length)
                    break
            if entry is None:
                raise FormatError(f"no code matches the stream at bit {pos}")
        out[n] = entry[0]
        pos += entry[1]
        if pos > bits.nbits:
            raise FormatError(
                f"stream exhausted after {n} of {count} symbols"
            )
    if pos != bits.nbits:
        raise FormatError(
            f"{bits.nbits - pos} unexpected bits after the last symbol"
        )
    return out


def _next_len(lens, length):
    i = lens.index(length)
    return lens[i + 1] if i + 1 < len(lens) else None


def serialize_table(table: HuffmanTable) -> bytes:
    """Alphabet size u16, then (symbol i8, length u8) per entry."""
    syms = table.symbols
    if len(syms) > 0xFFFF:
        raise CodingError("alphabet too large to serialize")
    out = bytearray(struct.pack("<H", len(syms)))
    for sym in syms:
        if not -128 <= sym <= 127:
            raise CodingError(f"symbol {sym} outside the signed 8-bit range")
        length = table.lengths[sym]
        if length > 0xFF:
            raise CodingError(f"code length {length} too large to serialize")
        out += struct.pack("<bB", sym, length)
    return bytes(out)


def parse_table(data: bytes, offset: int = 0):
    """Inverse of serialize_table; returns (table or None, next offset).

    An alphabet size of zero denotes the empty table used by streams that
    carry no symbols at all.
    """
    if len(data) < offset + 2:
        raise FormatError("truncated code table")
    (size,) = struct.unpack_from("<H", data, offset)
    offset += 2
    if size == 0:
        return None, offset
    if len(data) < offset + 2 * size:
        raise FormatError("truncated code table entries")
    lengths = {}
    for _ in range(size):
        sym, length = struct.unpack_from("<bB", data, offset)
        offset += 2
        if sym in lengths:
            raise FormatError(f"symbol {sym} listed twice in code table")
        lengths[sym] = length
    return HuffmanTable(lengths), offset
