"""Inter-layer weight prediction codec for 3x3 depthwise kernels.

Compresses stacks of depthwise convolution kernels by predicting each
kernel from a similar kernel in an earlier layer, quantizing the
residual, and entropy-coding the symbols with one canonical Huffman
table.  Ships an analyzer for similarity and entropy diagnostics and a
CLI (``ilwp``) wiring the pieces to .wgt / .ilw files.
"""

from .analyzer import (Histogram, LaplaceFit, SourceHeatmap, empirical_entropy,
                       fit_laplace, laplace_entropy, prediction_source_heatmap,
                       residual_histogram, svwh_ratio)
from .codec import (EncodedModel, SizeReport, decode_model, encode_model,
                    from_bytes, measure_sizes, sweep_bits, to_bytes)
from .errors import (AnalysisError, CodingError, ConfigError, FormatError,
                     IlwpError, PredictionError)
from .huffman import HuffmanTable, build_table, histogram
from .modes import Mode
from .predictor import (PredictionRecord, collocated_index, compute_residual,
                        find_best_prediction, l1_distance)
from .quantizer import QuantizedPlane, dequantize, quantize
from .weightstore import WeightStore, load_weight_store, save_weight_store

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "CodingError", "ConfigError", "EncodedModel",
    "FormatError", "Histogram", "HuffmanTable", "IlwpError", "LaplaceFit",
    "Mode", "PredictionError", "PredictionRecord", "QuantizedPlane",
    "SizeReport", "SourceHeatmap", "WeightStore", "build_table",
    "collocated_index", "compute_residual", "decode_model", "dequantize",
    "empirical_entropy", "encode_model", "find_best_prediction",
    "fit_laplace", "from_bytes", "histogram", "l1_distance",
    "laplace_entropy", "load_weight_store", "measure_sizes",
    "prediction_source_heatmap", "quantize", "residual_histogram",
    "save_weight_store", "svwh_ratio", "sweep_bits", "to_bytes",
]
