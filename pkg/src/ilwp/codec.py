"""Closed-loop encoder/decoder for depthwise weight stores.

Layer 0 is carried raw (float32, never quantized) and seeds prediction.
Each later layer is coded as one residual plane: every kernel picks a
reference per the mode, the whole layer's residuals share one quantizer
scale, and the reconstructed layer (reference + dequantized residual)
feeds the predictions of the layers after it.  The encoder searches over
reconstructed kernels only, so it tracks the decoder exactly.

Re-encoding a decoded store reproduces the original code exactly: before
searching, the encoder tests whether a layer already is a closed-loop
reconstruction over its context, i.e. whether every kernel equals
reference + symbol * scale bit-for-bit under one shared float32 scale.
Quantization noise makes such a layer sit closer to other candidates
than to its true references, so a plain re-search would drift; the
bit-exact recognition recovers the original references, scale and
symbols instead, which makes encode -> decode -> encode byte-identical.
Layers that are not reconstructions never pass the exact test and take
the ordinary single-pass search.

Streams inside the .ilw container (little-endian):

    magic "ILWC" | version u16 = 1 | mode u8 | bits u8 | layer count u32
    | per-layer kernel count u32 | per-layer scale f32 (layer 0 slot 0.0)
    | layer-0 raw f32 | code table | non-texture: bit count u32 + bytes
    | texture: symbol count u32 + bit count u32 + bytes

Texture bits are the Huffman-coded residual symbols of all layers under
one global table; non-texture bits are the packed reference indices (FSS
stores u then v, LSS stores v, ILL and BASELINE store nothing).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import huffman
from .bitio import BitReader, BitString, BitWriter
from .errors import ConfigError, FormatError
from .modes import MODE_CODES, MODE_FROM_CODE, Mode
from .predictor import best_sources
from .quantizer import QuantizedPlane, check_bits, dequantize, quantize, symbol_limit
from .weightstore import KERNEL_SIZE, WeightStore

ILW_MAGIC = b"ILWC"
ILW_VERSION = 1


def _index_width(n: int) -> int:
    """Bits needed for values 0..n-1 (0 when there is a single value)."""
    return (n - 1).bit_length()


@dataclass(frozen=True)
class SizeReport:
    """Exact bit accounting for one encoded model."""

    texture_bits: int
    non_texture_bits: int
    header_bits: int

    @property
    def total_bits(self) -> int:
        return self.texture_bits + self.non_texture_bits + self.header_bits

    @property
    def total_kb(self) -> float:
        """Size in kilobytes of 1000 bytes."""
        return self.total_bits / 8000.0


@dataclass(frozen=True)
class EncodedModel:
    """One coded store: header fields plus the two packed streams."""

    mode: Mode
    bits: int
    kernel_counts: tuple
    scales: tuple
    first_layer_raw: bytes
    table: huffman.HuffmanTable | None
    non_texture: BitString
    texture: BitString
    texture_symbol_count: int
    model_name: str = ""


def _explain_exactly(stack, targets, scale, limit):
    """Check whether every target kernel lies on a candidate's lattice.

    A kernel is explained by candidate c when, with k = rint((t - c)/scale)
    bounded by the symbol limit, c + k * scale reproduces t bit for bit
    (the identical float64 expression the decoder evaluates).  Returns
    (flat candidate index per kernel, symbol matrix) taking the first
    explaining candidate in (layer, kernel) order, or None if some kernel
    has no explanation at this scale.
    """
    diff = targets[:, None, :] - stack[None, :, :]
    with np.errstate(all="ignore"):
        kvec = np.rint(diff / scale)
        exact = stack[None, :, :] + kvec * scale == targets[:, None, :]
    ok = exact.all(axis=2) & (np.abs(kvec) <= limit).all(axis=2)
    if not ok.any(axis=1).all():
        return None
    flat = ok.argmax(axis=1)
    symbols = kvec[np.arange(targets.shape[0]), flat].astype(np.int16)
    return flat, symbols


def _lattice_code(stack, offsets, values, scale, bits):
    """Canonical exact code of a layer of lattice values, or None.

    The representation of a reconstructed layer is not unique: chains of
    coded layers share scales, so a kernel can sit on several candidates'
    lattices, and a plane whose symbols are all even is equally valid at
    twice the scale with halved symbols.  Re-encoding must land on one
    representation, so this picks the largest exactly-representable
    scale (doubling is exact in float32) and, per kernel, the first
    explaining candidate in (layer, kernel) order at that scale.
    """
    limit = symbol_limit(bits)
    best = _explain_exactly(stack, values, scale, limit)
    if best is None:
        return None
    while best[1].any():
        doubled = scale * 2.0
        if not np.isfinite(doubled):
            break
        trial = _explain_exactly(stack, values, doubled, limit)
        if trial is None:
            break
        scale, best = doubled, trial
    flat, symbols = best
    u = np.searchsorted(offsets, flat, side="right") - 1
    v = flat - offsets[u]
    plane = QuantizedPlane(symbols.ravel(), scale, bits, values.size)
    recon = stack[flat] + symbols.astype(np.float64) * scale
    return u, v, plane, recon


def _recognize_layer(stack, offsets, targets, bits):
    """Recover the exact code of a layer that is already a reconstruction.

    Scale hypotheses come from the first kernel that matches no candidate
    bit for bit: each candidate's largest absolute difference divided by
    every possible symbol magnitude, rounded to float32 like a stored
    scale.  Hypotheses are tried largest first — the canonical scale is
    the largest representable one — and survive only if the whole layer
    passes the bit-exact lattice test, so layers that were not produced
    by the closed loop fall through to the ordinary search (returns
    None).  Layers whose kernels all duplicate a candidate also return
    None: the plain path regenerates their all-zero plane identically.
    """
    limit = symbol_limit(bits)
    matched = (targets[:, None, :] == stack[None, :, :]).all(axis=2).any(axis=1)
    if matched.all():
        return None
    anchor = targets[int(np.argmin(matched))]
    diff = anchor[None, :] - stack
    peaks = np.abs(diff).max(axis=1)
    magnitudes = np.arange(1, limit + 1, dtype=np.float64)
    with np.errstate(all="ignore"):
        grid = (peaks[:, None] / magnitudes[None, :]).astype(np.float32)
        grid = grid.astype(np.float64)
        kvec = np.rint(diff[:, None, :] / grid[:, :, None])
        exact = stack[:, None, :] + kvec * grid[:, :, None] == anchor[None, None, :]
    ok = exact.all(axis=2) & (np.abs(kvec) <= limit).all(axis=2) & (grid > 0.0)
    if not ok.any():
        return None
    for scale in np.unique(grid[ok])[::-1]:
        code = _lattice_code(stack, offsets, targets, float(scale), bits)
        if code is not None:
            return code
    return None


def _encode_layers(store: WeightStore, mode: Mode, bits: int):
    """Run the closed loop over all layers.

    Returns (scales, planes, indices, recon) where indices holds one
    (u, v) int array pair per coded layer (None for unpredicted modes)
    and recon is the decoder-identical reconstruction of every layer.
    """
    recon = [store.layers[0]]
    scales = [0.0]
    planes = []
    indices = []
    for i in range(1, store.num_layers):
        targets = store.layers[i]
        c = targets.shape[0]
        if mode is Mode.BASELINE:
            plane = quantize(targets, bits)
            layer_recon = dequantize(plane).reshape(c, KERNEL_SIZE)
            indices.append(None)
        elif mode is Mode.ILL:
            prev = recon[i - 1]
            refs = prev[np.arange(c) % prev.shape[0]]
            plane = quantize(targets - refs, bits)
            layer_recon = refs + dequantize(plane).reshape(c, KERNEL_SIZE)
            indices.append(None)
        else:
            ctx = recon[:i] if mode is Mode.FSS else [recon[i - 1]]
            base = 0 if mode is Mode.FSS else i - 1
            stack = np.concatenate(ctx)
            offsets = np.concatenate(([0], np.cumsum([a.shape[0] for a in ctx])))
            code = _recognize_layer(stack, offsets, targets, bits)
            if code is None:
                u, v = best_sources(ctx, targets)
                refs = stack[offsets[u] + v]
                plane = quantize(targets - refs, bits)
                layer_recon = refs + dequantize(plane).reshape(c, KERNEL_SIZE)
                # Normalize the emitted representation by recognizing our
                # own reconstruction: a re-encoder sees only that
                # reconstruction, so the stored code must be exactly what
                # recognition recovers from it.
                code = _recognize_layer(stack, offsets, layer_recon, bits)
            if code is not None:
                u, v, plane, layer_recon = code
            indices.append((base + u, v))
        scales.append(plane.scale)
        planes.append(plane)
        recon.append(layer_recon)
    return scales, planes, indices, recon


def _pack_indices(mode: Mode, kernel_counts, indices) -> BitString:
    """Pack reference indices with position-dependent fixed widths."""
    writer = BitWriter()
    for i, pair in enumerate(indices, start=1):
        if pair is None:
            continue
        u_arr, v_arr = pair
        if mode is Mode.FSS:
            u_width = _index_width(i)
            for u, v in zip(u_arr.tolist(), v_arr.tolist()):
                writer.write(u, u_width)
                writer.write(v, _index_width(kernel_counts[u]))
        else:
            v_width = _index_width(kernel_counts[i - 1])
            for v in v_arr.tolist():
                writer.write(v, v_width)
    return writer.finish()


def encode_model(store: WeightStore, mode: Mode, bits: int,
                 _with_recon: bool = False):
    """Encode a store; layer 0 raw, layers >= 1 predicted and quantized."""
    mode = Mode.from_name(mode) if not isinstance(mode, Mode) else mode
    bits = check_bits(bits)
    if mode is not Mode.BASELINE and store.num_layers < 2:
        raise ConfigError(f"mode {mode.value} needs at least 2 layers, store has "
                          f"{store.num_layers}")
    scales, planes, indices, recon = _encode_layers(store, mode, bits)
    if planes:
        symbols = np.concatenate([p.symbols.ravel() for p in planes])
    else:
        symbols = np.zeros(0, dtype=np.int16)
    if symbols.size:
        table = huffman.build_table(huffman.histogram(symbols))
        texture = huffman.encode(symbols, table)
    else:
        table = None
        texture = BitString.empty()
    enc = EncodedModel(
        mode=mode,
        bits=bits,
        kernel_counts=store.layer_counts,
        scales=tuple(scales),
        first_layer_raw=store.layers[0].astype("<f4").tobytes(),
        table=table,
        non_texture=_pack_indices(mode, store.layer_counts, indices),
        texture=texture,
        texture_symbol_count=int(symbols.size),
        model_name=store.model_name,
    )
    if _with_recon:
        return enc, recon
    return enc


def decode_model(enc: EncodedModel) -> WeightStore:
    """Rebuild the reconstructed store from an encoded model.

    The output is bit-identical to the reconstruction the encoder
    tracked: layer 0 exactly, later layers reference + symbol * scale.
    """
    counts = enc.kernel_counts
    if len(counts) == 0:
        raise FormatError("encoded model declares zero layers")
    if any(c < 1 for c in counts):
        raise FormatError("encoded model declares an empty layer")
    bits = check_bits(enc.bits)
    if enc.mode is not Mode.BASELINE and len(counts) < 2:
        raise FormatError("predicted modes need at least 2 layers")
    raw = np.frombuffer(enc.first_layer_raw, dtype="<f4")
    if raw.size != counts[0] * KERNEL_SIZE:
        raise FormatError("layer 0 payload does not match its kernel count")
    if not np.isfinite(raw).all():
        raise FormatError("non-finite value in layer 0 payload")
    expected_symbols = KERNEL_SIZE * sum(counts[1:])
    if enc.texture_symbol_count != expected_symbols:
        raise FormatError(
            f"texture declares {enc.texture_symbol_count} symbols, "
            f"layer table requires {expected_symbols}"
        )
    if expected_symbols:
        if enc.table is None:
            raise FormatError("texture symbols present but no code table")
        symbols = huffman.decode(enc.texture, enc.table, expected_symbols)
    else:
        if enc.texture.nbits:
            raise FormatError("texture bits present but no symbols declared")
        symbols = np.zeros(0, dtype=np.int16)
    if enc.mode in (Mode.BASELINE, Mode.ILL) and enc.non_texture.nbits:
        raise FormatError(f"mode {enc.mode.value} carries no reference indices")

    recon = [raw.astype(np.float64).reshape(counts[0], KERNEL_SIZE)]
    reader = BitReader(enc.non_texture)
    pos = 0
    for i in range(1, len(counts)):
        c = counts[i]
        n = c * KERNEL_SIZE
        scale = enc.scales[i]
        if not scale > 0.0:
            raise FormatError(f"layer {i} scale must be positive, got {scale}")
        plane = QuantizedPlane(symbols[pos : pos + n], scale, bits, n)
        pos += n
        values = dequantize(plane).reshape(c, KERNEL_SIZE)
        if enc.mode is Mode.BASELINE:
            recon.append(values)
            continue
        if enc.mode is Mode.ILL:
            prev = recon[i - 1]
            refs = prev[np.arange(c) % prev.shape[0]]
        else:
            refs = np.empty((c, KERNEL_SIZE))
            u_width = _index_width(i)
            v_width_prev = _index_width(counts[i - 1])
            for j in range(c):
                if enc.mode is Mode.FSS:
                    u = reader.read(u_width)
                    if u >= i:
                        raise FormatError(
                            f"layer {i} kernel {j}: source layer {u} out of range"
                        )
                    v = reader.read(_index_width(counts[u]))
                else:
                    u = i - 1
                    v = reader.read(v_width_prev)
                if v >= counts[u]:
                    raise FormatError(
                        f"layer {i} kernel {j}: source kernel {v} out of range"
                    )
                refs[j] = recon[u][v]
        recon.append(refs + values)
    reader.expect_exhausted()
    return WeightStore(tuple(recon), enc.model_name)


def measure_sizes(enc: EncodedModel) -> SizeReport:
    """Exact bit split of the serialized model.

    header_bits covers the fixed header, layer table, scales, raw layer
    0, the code table and the stream length prefixes; texture_bits and
    non_texture_bits are the exact payload bit counts, excluding the
    byte-alignment padding of the two streams.
    """
    L = len(enc.kernel_counts)
    table_bytes = len(huffman.serialize_table(enc.table)) if enc.table else 2
    header_bytes = (
        12            # magic, version, mode, bits, layer count
        + 4 * L       # kernel counts
        + 4 * L       # scales
        + len(enc.first_layer_raw)
        + table_bytes
        + 4           # non-texture bit count
        + 8           # texture symbol count + bit count
    )
    return SizeReport(
        texture_bits=enc.texture.nbits,
        non_texture_bits=enc.non_texture.nbits,
        header_bits=8 * header_bytes,
    )


def sweep_bits(store: WeightStore, mode: Mode, bit_widths) -> list:
    """Encode at each bit width; returns [(bits, SizeReport), ...]."""
    widths = [check_bits(b) for b in bit_widths]
    if not widths:
        raise ConfigError("bit-width sweep needs at least one width")
    return [(b, measure_sizes(encode_model(store, mode, b))) for b in widths]


def to_bytes(enc: EncodedModel) -> bytes:
    """Serialize to the .ilw container."""
    L = len(enc.kernel_counts)
    out = bytearray()
    out += ILW_MAGIC
    out += struct.pack("<HBBI", ILW_VERSION, MODE_CODES[enc.mode], enc.bits, L)
    out += struct.pack(f"<{L}I", *enc.kernel_counts)
    out += struct.pack(f"<{L}f", *enc.scales)
    out += enc.first_layer_raw
    out += huffman.serialize_table(enc.table) if enc.table else struct.pack("<H", 0)
    out += struct.pack("<I", enc.non_texture.nbits)
    out += enc.non_texture.data
    out += struct.pack("<II", enc.texture_symbol_count, enc.texture.nbits)
    out += enc.texture.data
    return bytes(out)


def from_bytes(data: bytes, model_name: str = "") -> EncodedModel:
    """Parse an .ilw container; every length must check out exactly."""
    if len(data) < 12:
        raise FormatError("truncated model: missing header")
    if data[:4] != ILW_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}")
    version, mode_code, bits, L = struct.unpack_from("<HBBI", data, 4)
    if version != ILW_VERSION:
        raise FormatError(f"unsupported model version {version}")
    if mode_code not in MODE_FROM_CODE:
        raise FormatError(f"unknown mode code {mode_code}")
    mode = MODE_FROM_CODE[mode_code]
    try:
        check_bits(bits)
    except ConfigError as exc:
        raise FormatError(str(exc)) from None
    if L == 0:
        raise FormatError("model declares zero layers")
    offset = 12
    if len(data) < offset + 8 * L:
        raise FormatError("truncated model: missing layer table")
    counts = struct.unpack_from(f"<{L}I", data, offset)
    offset += 4 * L
    scales = struct.unpack_from(f"<{L}f", data, offset)
    offset += 4 * L
    if any(c == 0 for c in counts):
        raise FormatError("layer with zero kernels")
    raw_len = 4 * KERNEL_SIZE * counts[0]
    if len(data) < offset + raw_len:
        raise FormatError("truncated model: missing layer 0 payload")
    raw = data[offset : offset + raw_len]
    offset += raw_len
    table, offset = huffman.parse_table(data, offset)
    if len(data) < offset + 4:
        raise FormatError("truncated model: missing index stream header")
    (nt_bits,) = struct.unpack_from("<I", data, offset)
    offset += 4
    nt_len = (nt_bits + 7) // 8
    if len(data) < offset + nt_len:
        raise FormatError("truncated model: missing index stream")
    non_texture = BitString(data[offset : offset + nt_len], nt_bits)
    non_texture.check_padding()
    offset += nt_len
    if len(data) < offset + 8:
        raise FormatError("truncated model: missing texture header")
    sym_count, tex_bits = struct.unpack_from("<II", data, offset)
    offset += 8
    tex_len = (tex_bits + 7) // 8
    if len(data) < offset + tex_len:
        raise FormatError("truncated model: missing texture stream")
    texture = BitString(data[offset : offset + tex_len], tex_bits)
    offset += tex_len
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after model")
    return EncodedModel(
        mode=mode,
        bits=int(bits),
        kernel_counts=tuple(int(c) for c in counts),
        scales=tuple(float(s) for s in scales),
        first_layer_raw=raw,
        table=table,
        non_texture=non_texture,
        texture=texture,
        texture_symbol_count=int(sym_count),
        model_name=model_name,
    )
