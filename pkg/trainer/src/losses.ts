/**
 * The training objective: softmax cross-entropy (ops.ts) plus an inter-layer
 * penalty that pulls every depthwise kernel toward the collocated kernel of
 * the previous depthwise layer -- kernel j of layer i toward kernel
 * j mod c of layer i-1.  Minimizing it concentrates the codec's collocated
 * residuals around zero, which is what makes the ILL mode code small.
 */

import { Tape, Tensor, addScaled } from "./tensor";

export { crossEntropy } from "./ops";

/**
 * Mean absolute collocated difference over all predicted kernels:
 *
 *   (1/Z) * sum_{i>=1} sum_j |K[i][j] - K[i-1][j mod c_{i-1}]|  (element-wise)
 *
 * where Z counts every summed scalar (9 per predicted kernel).  The first
 * layer only serves as a reference.  The subgradient of |.| at 0 is taken
 * as 0, so exactly-matching kernels receive no pull.
 */
export function interLayerLoss(tape: Tape, kernels: Tensor[]): Tensor {
  if (kernels.length < 2) {
    throw new Error(
      `inter-layer loss needs at least 2 depthwise layers, got ${kernels.length}`
    );
  }
  for (const k of kernels) {
    if (k.size % 9 !== 0) throw new Error("kernel tensor size must be 9 per kernel");
  }
  let z = 0;
  for (let i = 1; i < kernels.length; i++) z += kernels[i].size;

  let acc = 0;
  for (let i = 1; i < kernels.length; i++) {
    const cur = kernels[i];
    const prev = kernels[i - 1];
    const cPrev = prev.size / 9;
    const count = cur.size / 9;
    for (let j = 0; j < count; j++) {
      const ref = (j % cPrev) * 9;
      const base = j * 9;
      for (let e = 0; e < 9; e++) {
        acc += Math.abs(cur.data[base + e] - prev.data[ref + e]);
      }
    }
  }
  const out = Tensor.scalar(acc / z);

  tape.record(() => {
    if (!out.grad) return;
    const g = out.grad[0] / z;
    for (let i = 1; i < kernels.length; i++) {
      const cur = kernels[i];
      const prev = kernels[i - 1];
      const gCur = cur.gradBuffer();
      const gPrev = prev.gradBuffer();
      const cPrev = prev.size / 9;
      const count = cur.size / 9;
      for (let j = 0; j < count; j++) {
        const ref = (j % cPrev) * 9;
        const base = j * 9;
        for (let e = 0; e < 9; e++) {
          const s = Math.sign(cur.data[base + e] - prev.data[ref + e]);
          gCur[base + e] += g * s;
          gPrev[ref + e] -= g * s;
        }
      }
    }
  });
  return out;
}

/** cls + lambda * il.  lambda = 0 recovers plain classification training. */
export function totalLoss(tape: Tape, cls: Tensor, il: Tensor, lambda: number): Tensor {
  if (!(lambda >= 0)) throw new Error(`lambda must be non-negative, got ${lambda}`);
  return addScaled(tape, cls, il, lambda);
}
