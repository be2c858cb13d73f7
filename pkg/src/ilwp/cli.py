"""Command-line front end.

Subcommands: encode, decode, stats, sweep, heatmap.  Every run prints a
one-line summary; reports go to the output path when given, else stdout.
File outputs are written atomically (temp file + rename).  Exit codes:
0 success, 1 usage error, 2 malformed data, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import analyzer, codec
from .errors import (AnalysisError, CodingError, ConfigError, FormatError,
                     PredictionError)
from .modes import Mode
from .quantizer import MAX_BITS, MIN_BITS
from .weightstore import load_weight_store, save_weight_store

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ilwp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    modes = [m.value for m in Mode]

    def add_io(p, out_help):
        p.add_argument("input", help="input file")
        p.add_argument("output", nargs="?", default=None, help=out_help)
        p.add_argument("--out", default=None, help="alternative to the output argument")

    p = sub.add_parser("encode", help="compress a .wgt store to .ilw")
    p.add_argument("--mode", required=True, choices=modes)
    p.add_argument("--bits", required=True, help=f"bit width {MIN_BITS}..{MAX_BITS}")
    add_io(p, "output .ilw path")

    p = sub.add_parser("decode", help="reconstruct a .wgt store from .ilw")
    add_io(p, "output .wgt path")

    p = sub.add_parser("stats", help="residual and entropy report for one setting")
    p.add_argument("--mode", required=True, choices=modes)
    p.add_argument("--bits", required=True)
    p.add_argument("--report", choices=["json", "csv"], default="json")
    p.add_argument("--bin-width", type=float, default=0.01,
                   help="residual histogram bin width (csv report)")
    add_io(p, "report path (stdout when omitted)")

    p = sub.add_parser("sweep", help="size report across bit widths")
    p.add_argument("--mode", required=True, choices=modes)
    p.add_argument("--bits", required=True, help="comma-separated widths, e.g. 2,3,4")
    p.add_argument("--report", choices=["json", "csv"], default="csv")
    add_io(p, "report path (stdout when omitted)")

    p = sub.add_parser("heatmap", help="prediction source heatmap")
    p.add_argument("--report", choices=["json", "csv"], default="json")
    add_io(p, "report path (stdout when omitted)")

    return parser


def _read_file(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _write_atomic(path: str, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ilwp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        _write_atomic(path, text.encode())


def _output_path(args):
    if args.output is not None and args.out is not None:
        raise _UsageError("give the output either positionally or via --out, not both")
    return args.output if args.output is not None else args.out


def _parse_bits_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise ConfigError(f"bad bit-width list {text!r}") from None


def _size_summary(mode, bits, report: codec.SizeReport) -> str:
    return (
        f"mode={mode.value} bits={bits} "
        f"texture={report.texture_bits / 8:.1f}B "
        f"non_texture={report.non_texture_bits / 8:.1f}B "
        f"header={report.header_bits / 8:.1f}B "
        f"total={report.total_bits / 8:.1f}B ({report.total_kb:.3f} KB)"
    )


def _load_store(path: str):
    name = os.path.splitext(os.path.basename(path))[0]
    return load_weight_store(_read_file(path), model_name=name)


def _sizes_dict(report: codec.SizeReport) -> dict:
    return {
        "texture_bits": report.texture_bits,
        "non_texture_bits": report.non_texture_bits,
        "header_bits": report.header_bits,
        "total_bits": report.total_bits,
        "total_kb": report.total_kb,
    }


def _cmd_encode(args) -> int:
    out = _output_path(args)
    if out is None:
        raise _UsageError("encode needs an output path")
    store = _load_store(args.input)
    bits_list = _parse_bits_list(args.bits)
    if len(bits_list) != 1:
        raise ConfigError("encode takes exactly one bit width")
    enc = codec.encode_model(store, Mode(args.mode), bits_list[0])
    _write_atomic(out, codec.to_bytes(enc))
    print(f"encode: {_size_summary(enc.mode, enc.bits, codec.measure_sizes(enc))} -> {out}")
    return EXIT_OK


def _cmd_decode(args) -> int:
    out = _output_path(args)
    if out is None:
        raise _UsageError("decode needs an output path")
    name = os.path.splitext(os.path.basename(args.input))[0]
    enc = codec.from_bytes(_read_file(args.input), model_name=name)
    store = codec.decode_model(enc)
    _write_atomic(out, save_weight_store(store))
    print(
        f"decode: mode={enc.mode.value} bits={enc.bits} layers={store.num_layers} "
        f"kernels={store.total_kernels} -> {out}"
    )
    return EXIT_OK


def _cmd_stats(args) -> int:
    store = _load_store(args.input)
    bits_list = _parse_bits_list(args.bits)
    if len(bits_list) != 1:
        raise ConfigError("stats takes exactly one bit width")
    bits = bits_list[0]
    mode = Mode(args.mode)
    enc, recon = codec.encode_model(store, mode, bits, _with_recon=True)
    report = codec.measure_sizes(enc)
    symbols = _all_symbols(enc, store.layer_counts)

    # Residuals as the quantizer saw them: target minus chosen reference
    # (raw weights for baseline).  The reference is recoverable from the
    # reconstruction: refs = recon - symbol * scale.
    residuals = []
    start = 0
    for i in range(1, store.num_layers):
        n = store.layer_counts[i] * 9
        if mode is Mode.BASELINE:
            residuals.append(store.layers[i].ravel())
        else:
            deq = symbols[start : start + n].astype(np.float64) * enc.scales[i]
            refs = np.asarray(recon[i]).ravel() - deq
            residuals.append(store.layers[i].ravel() - refs)
        start += n
    residuals = (np.concatenate(residuals) if residuals
                 else np.zeros(0, dtype=np.float64))
    sym_hist = {int(v): int(c) for v, c in
                zip(*np.unique(symbols, return_counts=True))} if symbols.size else {}
    zero_fraction = (float((symbols == 0).sum() / symbols.size)
                     if symbols.size else 0.0)

    payload = {
        "model": store.model_name,
        "mode": mode.value,
        "bits": bits,
        "layers": store.num_layers,
        "kernel_counts": list(store.layer_counts),
        "sizes": _sizes_dict(report),
        "zero_symbol_fraction": zero_fraction,
        "symbol_entropy_bits": (analyzer.empirical_entropy(sym_hist)
                                if sym_hist else None),
    }
    for label, values in (("residuals", residuals),
                          ("weights", np.concatenate([a.ravel() for a in store.layers]))):
        try:
            fit = analyzer.fit_laplace(values)
            payload[label] = {
                "count": fit.count,
                "laplace_mu": fit.mu,
                "laplace_b": fit.b,
                "laplace_entropy_nats": analyzer.laplace_entropy(fit.b),
            }
        except AnalysisError as exc:
            payload[label] = {"count": int(values.size), "error": str(exc)}
    try:
        payload["svwh_ratio"] = analyzer.svwh_ratio(store)
    except AnalysisError:
        payload["svwh_ratio"] = None

    if args.report == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        hist = analyzer.residual_histogram(residuals, args.bin_width)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["bin_center", "count"])
        for center, count in zip(hist.centers, hist.counts):
            writer.writerow([f"{center:.10g}", int(count)])
        text = buf.getvalue()
    _emit(text, _output_path(args))
    print(
        f"stats: {_size_summary(mode, bits, report)} "
        f"zero_symbols={zero_fraction:.4f}"
    )
    return EXIT_OK


def _all_symbols(enc, counts):
    from . import huffman
    total = 9 * sum(counts[1:])
    if not total:
        return np.zeros(0, dtype=np.int16)
    return huffman.decode(enc.texture, enc.table, total)


def _cmd_sweep(args) -> int:
    store = _load_store(args.input)
    mode = Mode(args.mode)
    rows = codec.sweep_bits(store, mode, _parse_bits_list(args.bits))
    if args.report == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["bits", "texture_bits", "non_texture_bits",
                         "header_bits", "total_bits"])
        for bits, rep in rows:
            writer.writerow([bits, rep.texture_bits, rep.non_texture_bits,
                             rep.header_bits, rep.total_bits])
        text = buf.getvalue()
    else:
        text = json.dumps({
            "model": store.model_name,
            "mode": mode.value,
            "rows": [dict(bits=bits, **_sizes_dict(rep)) for bits, rep in rows],
        }, indent=2) + "\n"
    _emit(text, _output_path(args))
    best = min(rows, key=lambda r: r[1].total_bits)
    print(
        f"sweep: mode={mode.value} widths={[b for b, _ in rows]} "
        f"smallest={best[1].total_kb:.3f} KB at {best[0]} bits"
    )
    return EXIT_OK


def _cmd_heatmap(args) -> int:
    store = _load_store(args.input)
    heatmap = analyzer.prediction_source_heatmap(store)
    try:
        ratio = analyzer.svwh_ratio(store)
    except AnalysisError:
        ratio = None
    if args.report == "json":
        text = json.dumps({
            "model": store.model_name,
            "layers": store.num_layers,
            "target_layers": list(heatmap.target_layers),
            "matrix": [[round(x, 10) for x in row] for row in heatmap.matrix.tolist()],
            "svwh_ratio": ratio,
        }, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["target_layer", "source_layer", "percent"])
        for row_idx, target in enumerate(heatmap.target_layers):
            for source in range(store.num_layers):
                writer.writerow([target, source, f"{heatmap.matrix[row_idx][source]:.6f}"])
        text = buf.getvalue()
    _emit(text, _output_path(args))
    diag = float(np.mean([heatmap.matrix[i - 1][i - 1] for i in heatmap.target_layers]))
    ratio_text = "n/a" if ratio is None else f"{ratio:.4f}"
    print(
        f"heatmap: layers={store.num_layers} previous_layer_mass={diag:.2f}% "
        f"svwh_ratio={ratio_text}"
    )
    return EXIT_OK


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "stats": _cmd_stats,
    "sweep": _cmd_sweep,
    "heatmap": _cmd_heatmap,
}


def run(argv=None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, CodingError, PredictionError, AnalysisError, ValueError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
