/**
 * Training with the inter-layer penalty, and export to .wgt.
 *
 * One run: SGD with Nesterov momentum 0.9, learning rate 0.1 decayed by
 * 0.98 each epoch, loss = cross-entropy + lambda * inter-layer penalty.
 * After the last epoch the depthwise kernels are snapped to float32 (the
 * container's precision) before both the final accuracy measurement and
 * the export, so the .wgt artifact and the reported metrics describe the
 * same function.
 */

import * as fs from "node:fs";
import { DEFAULT_SYNTHETIC, Dataset, SyntheticSpec, cifar10Dataset, syntheticDataset } from "./data";
import { interLayerLoss, totalLoss } from "./losses";
import { ArchSpec, Batch, DEFAULT_ARCH, Model } from "./model";
import { Rng } from "./rng";
import { Sgd } from "./sgd";
import { Tape } from "./tensor";
import { saveWeightStore } from "./wgt";

export type DatasetSelector =
  | { kind: "synthetic"; seed?: number; spec?: SyntheticSpec }
  | { kind: "cifar10"; dir: string; trainCount?: number; testCount?: number };

export interface TrainConfig {
  lambda: number;
  epochs: number;
  batchSize: number;
  seed: number;
  arch: ArchSpec;
  dataset: DatasetSelector;
  dwInitStd?: number;
  lr?: number;
  lrDecay?: number;
  momentum?: number;
  /** Global gradient-norm clip; omit to disable. */
  clipNorm?: number;
}

export const DEFAULT_CONFIG: TrainConfig = {
  lambda: 1,
  epochs: 30,
  batchSize: 64,
  seed: 7,
  arch: DEFAULT_ARCH,
  dataset: { kind: "synthetic" },
};

export interface EpochRecord {
  epoch: number;
  lr: number;
  totalLoss: number;
  clsLoss: number;
  ilLoss: number;
}

export interface TrainMetrics {
  lambda: number;
  epochs: number;
  seed: number;
  trainAccuracy: number;
  testAccuracy: number;
  meanCollocatedL1: number;
  curve: EpochRecord[];
}

export interface TrainResult {
  model: Model;
  metrics: TrainMetrics;
  dataset: Dataset;
}

function loadDataset(sel: DatasetSelector, arch: ArchSpec): Dataset {
  if (sel.kind === "synthetic") {
    // Unless a spec is given, shape the synthetic data to the architecture
    // so any arch works with the default dataset selector.
    const spec = sel.spec ?? {
      ...DEFAULT_SYNTHETIC,
      imageSize: arch.imageSize,
      channels: arch.inChannels,
      classes: arch.classes,
    };
    return syntheticDataset(sel.seed ?? 1, spec);
  }
  return cifar10Dataset(sel.dir, sel.trainCount, sel.testCount);
}

/** Mean absolute collocated difference of the model's current kernels. */
export function meanCollocatedL1(model: Model): number {
  return interLayerLoss(new Tape(), model.depthwiseKernels()).item();
}

export function train(config: TrainConfig): TrainResult {
  if (!(config.lambda >= 0)) throw new Error(`lambda must be non-negative, got ${config.lambda}`);
  if (config.epochs < 1) throw new Error("epochs must be positive");
  const data = loadDataset(config.dataset, config.arch);
  if (data.imageSize !== config.arch.imageSize || data.channels !== config.arch.inChannels) {
    throw new Error(
      `dataset is ${data.channels}x${data.imageSize}x${data.imageSize}, architecture ` +
      `expects ${config.arch.inChannels}x${config.arch.imageSize}x${config.arch.imageSize}`
    );
  }

  const rng = new Rng(config.seed);
  const model = new Model(config.arch, rng, config.dwInitStd ?? 0.1);
  const opt = new Sgd(model.parameters(), config.lr ?? 0.1,
                      config.momentum ?? 0.9, config.lrDecay ?? 0.98,
                      config.clipNorm ?? null);

  const sample = data.channels * data.imageSize * data.imageSize;
  const order = new Int32Array(data.train.n);
  for (let i = 0; i < order.length; i++) order[i] = i;
  const batchImages = new Float64Array(config.batchSize * sample);
  const batchLabels = new Int32Array(config.batchSize);

  const curve: EpochRecord[] = [];
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    rng.shuffle(order);
    let lossAcc = 0, clsAcc = 0, ilAcc = 0, batches = 0;
    for (let start = 0; start + config.batchSize <= data.train.n; start += config.batchSize) {
      const n = config.batchSize;
      for (let i = 0; i < n; i++) {
        const src = order[start + i];
        batchImages.set(data.train.images.subarray(src * sample, (src + 1) * sample), i * sample);
        batchLabels[i] = data.train.labels[src];
      }
      const batch: Batch = { images: batchImages, labels: batchLabels, n };

      const tape = new Tape();
      const cls = model.loss(tape, batch);
      const il = interLayerLoss(tape, model.depthwiseKernels());
      const loss = totalLoss(tape, cls, il, config.lambda);
      opt.zeroGrad();
      tape.backward(loss);
      opt.step();

      lossAcc += loss.item();
      clsAcc += cls.item();
      ilAcc += il.item();
      batches++;
    }
    curve.push({
      epoch,
      lr: opt.lr,
      totalLoss: lossAcc / batches,
      clsLoss: clsAcc / batches,
      ilLoss: ilAcc / batches,
    });
    opt.endEpoch();
  }

  model.snapDepthwiseToFloat32();
  const metrics: TrainMetrics = {
    lambda: config.lambda,
    epochs: config.epochs,
    seed: config.seed,
    trainAccuracy: model.accuracy(data.train),
    testAccuracy: model.accuracy(data.test),
    meanCollocatedL1: meanCollocatedL1(model),
    curve,
  };
  return { model, metrics, dataset: data };
}

/** Train, then write the depthwise kernels to .wgt (and metrics to JSON). */
export function trainAndExport(
  config: TrainConfig,
  wgtPath: string,
  metricsPath?: string,
): TrainResult {
  const result = train(config);
  fs.writeFileSync(wgtPath, saveWeightStore(result.model.exportDepthwise()));
  if (metricsPath) {
    fs.writeFileSync(metricsPath, JSON.stringify(result.metrics, null, 2) + "\n");
  }
  return result;
}
