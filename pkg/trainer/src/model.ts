/**
 * A small depthwise-separable CNN: 3x3 stem, a chain of depthwise-separable
 * blocks (depthwise 3x3 then pointwise 1x1, ReLU after each), optional 2x2
 * average pools between blocks, global average pooling, and a dense head.
 *
 * The depthwise kernels -- one 3x3 kernel per channel per block -- are the
 * tensors the codec compresses.  They are exported in forward order, so
 * store layer i is block i's depthwise stage and the collocated reference
 * j mod c of the previous store layer is this block's input channel j's
 * kernel one block earlier.
 */

import { Tape, Tensor, relu } from "./tensor";
import { avgPool2, conv3x3, crossEntropy, dwConv3x3, globalAvgPool, linear, pwConv } from "./ops";
import { Rng } from "./rng";
import { WeightStore } from "./wgt";

export interface ArchSpec {
  imageSize: number;
  inChannels: number;
  stemWidth: number;
  /** Output width of each depthwise-separable block, in forward order. */
  blockWidths: number[];
  /** 1-based block indices followed by a 2x2 average pool. */
  poolAfter: number[];
  classes: number;
}

/** The architecture the harness targets by default; tests shrink it. */
export const DEFAULT_ARCH: ArchSpec = {
  imageSize: 32,
  inChannels: 3,
  stemWidth: 32,
  blockWidths: [32, 64, 64, 96, 96, 128, 128, 128],
  poolAfter: [2, 4, 6],
  classes: 10,
};

export interface Batch {
  images: Float64Array; // [n, inChannels, size, size]
  labels: Int32Array;
  n: number;
}

function fill(rng: Rng, t: Tensor, std: number): void {
  for (let i = 0; i < t.size; i++) t.data[i] = rng.normal() * std;
}

export class Model {
  arch: ArchSpec;
  stemW: Tensor;
  stemB: Tensor;
  dwW: Tensor[] = [];
  pwW: Tensor[] = [];
  pwB: Tensor[] = [];
  fcW: Tensor;
  fcB: Tensor;

  constructor(arch: ArchSpec, rng: Rng, dwInitStd = 0.1) {
    if (arch.blockWidths.length < 2) {
      throw new Error("need at least 2 depthwise-separable blocks");
    }
    this.arch = arch;
    this.stemW = Tensor.zeros([arch.stemWidth, arch.inChannels, 3, 3], true);
    this.stemB = Tensor.zeros([arch.stemWidth], true);
    fill(rng, this.stemW, Math.sqrt(2 / (9 * arch.inChannels)));

    let cIn = arch.stemWidth;
    for (const cOut of arch.blockWidths) {
      const dw = Tensor.zeros([cIn, 3, 3], true);
      fill(rng, dw, dwInitStd);
      const pw = Tensor.zeros([cOut, cIn], true);
      fill(rng, pw, Math.sqrt(2 / cIn));
      this.dwW.push(dw);
      this.pwW.push(pw);
      this.pwB.push(Tensor.zeros([cOut], true));
      cIn = cOut;
    }
    this.fcW = Tensor.zeros([arch.classes, cIn], true);
    fill(rng, this.fcW, Math.sqrt(2 / cIn));
    this.fcB = Tensor.zeros([arch.classes], true);
  }

  parameters(): Tensor[] {
    return [this.stemW, this.stemB, ...this.dwW, ...this.pwW, ...this.pwB,
            this.fcW, this.fcB];
  }

  /** Depthwise kernels in forward order: store layer i = block i's kernels. */
  depthwiseKernels(): Tensor[] {
    return this.dwW;
  }

  logits(tape: Tape, images: Float64Array, n: number): Tensor {
    const a = this.arch;
    let x: Tensor = new Tensor(images, [n, a.inChannels, a.imageSize, a.imageSize]);
    x.stopGrad = true; // images are data, not parameters
    x = relu(tape, conv3x3(tape, x, this.stemW, this.stemB));
    for (let b = 0; b < a.blockWidths.length; b++) {
      x = dwConv3x3(tape, x, this.dwW[b]);
      x = relu(tape, pwConv(tape, x, this.pwW[b], this.pwB[b]));
      if (a.poolAfter.includes(b + 1)) x = avgPool2(tape, x);
    }
    return linear(tape, globalAvgPool(tape, x), this.fcW, this.fcB);
  }

  loss(tape: Tape, batch: Batch): Tensor {
    return crossEntropy(tape, this.logits(tape, batch.images, batch.n), batch.labels);
  }

  /** Top-1 accuracy, evaluated in chunks to bound memory. */
  accuracy(batch: Batch, chunk = 64): number {
    const a = this.arch;
    const sample = a.inChannels * a.imageSize * a.imageSize;
    let hits = 0;
    for (let start = 0; start < batch.n; start += chunk) {
      const n = Math.min(chunk, batch.n - start);
      const tape = new Tape(); // discarded: no backward pass
      const out = this.logits(tape, batch.images.subarray(start * sample, (start + n) * sample), n);
      for (let i = 0; i < n; i++) {
        let best = 0;
        for (let k = 1; k < a.classes; k++) {
          if (out.data[i * a.classes + k] > out.data[i * a.classes + best]) best = k;
        }
        if (best === batch.labels[start + i]) hits++;
      }
    }
    return hits / batch.n;
  }

  /**
   * Round the depthwise kernels to float32 in place.  Called once before
   * export so the in-memory model computes with exactly the values the
   * .wgt artifact holds -- splicing the uncoded export back in is then a
   * bit-exact no-op.
   */
  snapDepthwiseToFloat32(): void {
    for (const dw of this.dwW) {
      for (let i = 0; i < dw.size; i++) dw.data[i] = Math.fround(dw.data[i]);
    }
  }

  exportDepthwise(): WeightStore {
    return { layers: this.dwW.map((dw) => Float32Array.from(dw.data)) };
  }

  /**
   * Overwrite the depthwise kernels with store layers (e.g. a codec decode).
   * Every other parameter is untouched.  Layer count or kernel-count
   * mismatches are rejected.
   */
  spliceDepthwise(store: WeightStore): void {
    if (store.layers.length !== this.dwW.length) {
      throw new Error(
        `store has ${store.layers.length} layers, model has ${this.dwW.length} depthwise stages`
      );
    }
    for (let i = 0; i < store.layers.length; i++) {
      if (store.layers[i].length !== this.dwW[i].size) {
        throw new Error(
          `layer ${i}: store holds ${store.layers[i].length / 9} kernels, ` +
          `model expects ${this.dwW[i].size / 9}`
        );
      }
    }
    for (let i = 0; i < store.layers.length; i++) {
      this.dwW[i].data.set(store.layers[i]);
    }
  }
}
