/**
 * Datasets.  The default is a seeded synthetic 10-class problem (smooth
 * per-class prototypes plus Gaussian pixel noise) sized so a training run
 * finishes in test-suite time.  A CIFAR-10 binary-batch loader is provided
 * for real runs; it is never downloaded here.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { Batch } from "./model";
import { Rng } from "./rng";

export interface Dataset {
  train: Batch;
  test: Batch;
  imageSize: number;
  channels: number;
  classes: number;
}

export interface SyntheticSpec {
  imageSize: number;
  channels: number;
  classes: number;
  trainPerClass: number;
  testPerClass: number;
  noise: number;
}

export const DEFAULT_SYNTHETIC: SyntheticSpec = {
  imageSize: 12,
  channels: 3,
  classes: 10,
  trainPerClass: 128,
  testPerClass: 32,
  noise: 0.6,
};

/** Smooth class prototypes: a few random sinusoidal gratings per channel. */
function prototypes(rng: Rng, spec: SyntheticSpec): Float64Array[] {
  const { imageSize: s, channels } = spec;
  const out: Float64Array[] = [];
  for (let c = 0; c < spec.classes; c++) {
    const proto = new Float64Array(channels * s * s);
    for (let ch = 0; ch < channels; ch++) {
      for (let g = 0; g < 3; g++) {
        const fx = 1 + rng.int(3);
        const fy = 1 + rng.int(3);
        const phase = 2 * Math.PI * rng.next();
        const amp = 0.5 + 0.5 * rng.next();
        for (let y = 0; y < s; y++) {
          for (let x = 0; x < s; x++) {
            proto[(ch * s + y) * s + x] +=
              amp * Math.sin((2 * Math.PI * (fx * x + fy * y)) / s + phase);
          }
        }
      }
    }
    out.push(proto);
  }
  return out;
}

export function syntheticDataset(seed: number, spec: SyntheticSpec = DEFAULT_SYNTHETIC): Dataset {
  const rng = new Rng(seed);
  const protos = prototypes(rng, spec);
  const sample = spec.channels * spec.imageSize * spec.imageSize;

  const make = (perClass: number): Batch => {
    const n = perClass * spec.classes;
    const images = new Float64Array(n * sample);
    const labels = new Int32Array(n);
    const order = new Int32Array(n);
    for (let i = 0; i < n; i++) order[i] = i;
    rng.shuffle(order);
    for (let i = 0; i < n; i++) {
      const cls = i % spec.classes;
      const slot = order[i];
      labels[slot] = cls;
      const base = slot * sample;
      const proto = protos[cls];
      for (let p = 0; p < sample; p++) {
        images[base + p] = proto[p] + spec.noise * rng.normal();
      }
    }
    return { images, labels, n };
  };

  return {
    train: make(spec.trainPerClass),
    test: make(spec.testPerClass),
    imageSize: spec.imageSize,
    channels: spec.channels,
    classes: spec.classes,
  };
}

const CIFAR_RECORD = 1 + 3072; // label byte + 32x32x3

/**
 * CIFAR-10 binary batches (data_batch_1.bin .. data_batch_5.bin,
 * test_batch.bin) from the standard archive, unpacked under `dir`.
 */
export function cifar10Dataset(dir: string, trainCount = 10000, testCount = 2000): Dataset {
  const trainFile = path.join(dir, "data_batch_1.bin");
  const testFile = path.join(dir, "test_batch.bin");
  for (const f of [trainFile, testFile]) {
    if (!fs.existsSync(f)) {
      throw new Error(
        `CIFAR-10 batch not found: ${f}\n` +
        `Download cifar-10-binary.tar.gz (the "binary version"), unpack it, ` +
        `and point the dataset directory at cifar-10-batches-bin/.`
      );
    }
  }
  const read = (file: string, count: number): Batch => {
    const raw = fs.readFileSync(file);
    const available = Math.floor(raw.length / CIFAR_RECORD);
    const n = Math.min(count, available);
    const images = new Float64Array(n * 3072);
    const labels = new Int32Array(n);
    for (let i = 0; i < n; i++) {
      const base = i * CIFAR_RECORD;
      labels[i] = raw[base];
      for (let p = 0; p < 3072; p++) {
        images[i * 3072 + p] = (raw[base + 1 + p] / 255 - 0.5) / 0.25;
      }
    }
    return { images, labels, n };
  };
  return {
    train: read(trainFile, trainCount),
    test: read(testFile, testCount),
    imageSize: 32,
    channels: 3,
    classes: 10,
  };
}
