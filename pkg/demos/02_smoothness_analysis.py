"""Why inter-layer prediction works: measure the structure it exploits.

Compares two synthetic stores -- one whose layers evolve by small steps and
one with independent layers -- through the analyzer's instruments: the
previous-layer hit ratio, the source heatmap, and the residual distribution
against a fitted Laplace model.
"""

import numpy as np

from ilwp.analyzer import (
    empirical_entropy,
    fit_laplace,
    laplace_entropy,
    prediction_source_heatmap,
    residual_histogram,
    svwh_ratio,
)
from ilwp.codec import encode_model
from ilwp.huffman import histogram
from ilwp.modes import Mode
from ilwp.predictor import collocated_index
from ilwp.weightstore import WeightStore


def walk_store(rng, n_layers=8, kernels=12, step=0.02):
    layers = [rng.normal(0.0, 0.5, size=(kernels, 9))]
    for _ in range(n_layers - 1):
        layers.append(layers[-1] + rng.normal(0.0, step, size=(kernels, 9)))
    return WeightStore(
        tuple(np.asarray(l, dtype=np.float32).astype(np.float64) for l in layers)
    )


def shuffled_store(rng, n_layers=8, kernels=12):
    return WeightStore(tuple(
        rng.normal(0.0, 0.5, size=(kernels, 9)).astype(np.float32).astype(np.float64)
        for _ in range(n_layers)
    ))


def collocated_residuals(store):
    out = []
    for i in range(1, store.num_layers):
        prev = store.layers[i - 1]
        for j in range(store.layer_counts[i]):
            v = collocated_index(j, store.layer_counts[i - 1])
            out.extend(store.layers[i][j] - prev[v])
    return np.asarray(out)


def describe(name, store):
    print(f"== {name} ==")
    print(f"previous-layer hit ratio: {svwh_ratio(store):.3f}")

    heat = prediction_source_heatmap(store)
    diag = np.mean([heat.matrix[k][heat.target_layers[k] - 1]
                    for k in range(len(heat.target_layers))])
    print(f"mean mass on the immediately preceding layer: {diag:.1f}%")

    res = collocated_residuals(store)
    fit = fit_laplace(res)
    print(f"collocated residuals: fitted Laplace b = {fit.b:.4f} "
          f"(differential entropy {laplace_entropy(fit.b):.3f} nats)")

    hist = residual_histogram(res, bin_width=0.01)
    peak = hist.centers[int(np.argmax(hist.counts))]
    share = 100.0 * np.max(hist.counts) / np.sum(hist.counts)
    print(f"histogram mode at {peak:+.2f} holding {share:.1f}% of the mass")

    enc = encode_model(store, Mode.ILL, 4)
    counts = histogram(enc_symbols(enc))
    print(f"ILL 4-bit symbol entropy: {empirical_entropy(counts):.3f} bits "
          f"over {sum(counts.values())} symbols\n")


def enc_symbols(enc):
    from ilwp.huffman import decode
    return decode(enc.texture, enc.table, enc.texture_symbol_count)


def main():
    describe("layers that drift slowly", walk_store(np.random.default_rng(3)))
    describe("independent layers", shuffled_store(np.random.default_rng(3)))

    print("The drifting store concentrates its residuals in a sharp Laplace")
    print("peak and its search mass on the previous layer; the independent")
    print("store gives the predictor nothing to use, and its residual spread")
    print("matches the raw weight distribution.")
    print()
    print("Note the two symbol entropies above barely differ: each residual")
    print("plane is scaled to its own peak before quantization, so absolute")
    print("residual size cancels out.  What the coder can exploit is the")
    print("SHAPE of the distribution -- and Gaussian steps leave the same")
    print("shape as Gaussian weights.  Residuals must be more sharply peaked")
    print("than the weights (as trained networks' are) to code smaller.")


if __name__ == "__main__":
    main()
