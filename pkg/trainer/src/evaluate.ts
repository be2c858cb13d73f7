/**
 * Accuracy impact of compressed kernels: splice a decoded .wgt back into a
 * trained model (all non-depthwise parameters unchanged) and compare top-1
 * accuracy before and after.  The splice is rejected on any layer-count or
 * kernel-count mismatch.
 */

import * as fs from "node:fs";
import { Batch, Model } from "./model";
import { loadWeightStore } from "./wgt";

export interface DecodedEvaluation {
  before: number;
  after: number;
  /** before - after: positive means the compression cost accuracy. */
  delta: number;
}

export function evaluateDecoded(
  model: Model,
  decodedWgtPath: string,
  evalBatch: Batch,
): DecodedEvaluation {
  const store = loadWeightStore(fs.readFileSync(decodedWgtPath));
  const before = model.accuracy(evalBatch);

  const saved = model.depthwiseKernels().map((t) => Float64Array.from(t.data));
  try {
    model.spliceDepthwise(store);
    const after = model.accuracy(evalBatch);
    return { before, after, delta: before - after };
  } finally {
    const kernels = model.depthwiseKernels();
    for (let i = 0; i < kernels.length; i++) kernels[i].data.set(saved[i]);
  }
}
