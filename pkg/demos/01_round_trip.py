"""Round-trip walkthrough: encode a small store in every mode, decode it,
and verify the reconstruction error against the per-layer quantizer bound.

Builds a four-layer store whose layers drift slowly, which is the regime
inter-layer prediction is designed for, then walks one encode/decode cycle
per mode and reports where the bits went.
"""

import numpy as np

from ilwp.codec import decode_model, encode_model, from_bytes, measure_sizes, to_bytes
from ilwp.modes import Mode
from ilwp.weightstore import WeightStore


def drifting_store(seed=11, n_layers=4, kernels=8, step=0.02):
    rng = np.random.default_rng(seed)
    layers = [rng.normal(0.0, 0.5, size=(kernels, 9))]
    for _ in range(n_layers - 1):
        layers.append(layers[-1] + rng.normal(0.0, step, size=(kernels, 9)))
    return WeightStore(
        tuple(np.asarray(l, dtype=np.float32).astype(np.float64) for l in layers)
    )


def main():
    store = drifting_store()
    bits = 6
    print(f"store: {store.num_layers} layers, counts {store.layer_counts}, "
          f"{bits}-bit residuals\n")

    header = f"{'mode':10s} {'texture':>9s} {'indices':>9s} {'header':>9s} " \
             f"{'total':>9s}  {'max |err|/(scale/2)':>20s}"
    print(header)
    print("-" * len(header))

    for mode in Mode:
        enc = encode_model(store, mode, bits)
        sizes = measure_sizes(enc)
        back = decode_model(enc)

        # layer 0 travels raw; predicted layers obey the half-step bound
        assert np.array_equal(back.layers[0], store.layers[0])
        worst = 0.0
        for i in range(1, store.num_layers):
            err = np.max(np.abs(back.layers[i] - store.layers[i]))
            worst = max(worst, err / (enc.scales[i] / 2))
        assert worst <= 1.0

        # the container byte stream parses back to the same model
        assert to_bytes(from_bytes(to_bytes(enc))) == to_bytes(enc)

        print(f"{mode.value:10s} {sizes.texture_bits:>8d}b {sizes.non_texture_bits:>8d}b "
              f"{sizes.header_bits:>8d}b {sizes.total_bits:>8d}b  {worst:>20.3f}")

    print("\nBASELINE codes raw weights, so its residuals are the weights")
    print("themselves; the predicted modes code inter-layer differences and")
    print("spend (FSS > LSS > ILL = 0) side bits naming their references.")
    print("Errors sit at or below half a quantizer step by construction.")


if __name__ == "__main__":
    main()
