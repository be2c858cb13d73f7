"""Rate/fidelity sweep: how size and reconstruction error trade off as the
residual bit width moves from 2 to 8, for every mode side by side.

Each cell encodes the same store; sizes come from the exact bit accounting
and errors from decoding the closed loop, so the numbers are the ones a
deployment would actually see.
"""

import numpy as np

from ilwp.codec import decode_model, encode_model, sweep_bits
from ilwp.modes import Mode
from ilwp.weightstore import WeightStore


def make_store(seed=9, n_layers=6, kernels=16, step=0.015):
    rng = np.random.default_rng(seed)
    layers = [rng.normal(0.0, 0.5, size=(kernels, 9))]
    for _ in range(n_layers - 1):
        layers.append(layers[-1] + rng.normal(0.0, step, size=(kernels, 9)))
    return WeightStore(
        tuple(np.asarray(l, dtype=np.float32).astype(np.float64) for l in layers)
    )


def max_error(store, mode, bits):
    enc = encode_model(store, mode, bits)
    back = decode_model(enc)
    return max(
        float(np.max(np.abs(back.layers[i] - store.layers[i])))
        for i in range(1, store.num_layers)
    )


def main():
    store = make_store()
    widths = list(range(2, 9))
    raw_kb = sum(c * 9 * 4 for c in store.layer_counts) / 1024.0
    print(f"store: {store.num_layers} layers x {store.layer_counts[0]} kernels, "
          f"raw float32 payload {raw_kb:.2f} KB\n")

    by_mode = {mode: dict(sweep_bits(store, mode, widths)) for mode in Mode}

    print(f"{'bits':>4s} " + " ".join(f"{m.value + ' KB':>12s}" for m in Mode)
          + f" {'ill max err':>12s}")
    for bits in widths:
        row = [f"{bits:>4d}"]
        for mode in Mode:
            row.append(f"{by_mode[mode][bits].total_kb:>12.3f}")
        row.append(f"{max_error(store, Mode.ILL, bits):>12.5f}")
        print(" ".join(row))

    print()
    for mode in Mode:
        best = min(widths, key=lambda b: by_mode[mode][b].total_bits)
        print(f"{mode.value:10s} smallest at {best} bits "
              f"({by_mode[mode][best].total_kb:.3f} KB)")

    print("\nILL wins at every width: it pays nothing for indices and its")
    print("residuals code slightly tighter than raw weights.  The margin is")
    print("modest here because Gaussian steps share the raw weights' shape;")
    print("sharply peaked residual distributions widen it.  Reading up the")
    print("error column, every bit removed roughly doubles the error.")


if __name__ == "__main__":
    main()
