import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { evaluateDecoded } from "../src/evaluate";
import { ArchSpec, Batch, Model } from "../src/model";
import { Rng } from "../src/rng";
import { saveWeightStore } from "../src/wgt";

const MICRO: ArchSpec = {
  imageSize: 8,
  inChannels: 2,
  stemWidth: 4,
  blockWidths: [4, 4],
  poolAfter: [1],
  classes: 4,
};

function microBatch(rng: Rng, n: number): Batch {
  const sample = MICRO.inChannels * MICRO.imageSize * MICRO.imageSize;
  const images = new Float64Array(n * sample);
  for (let i = 0; i < images.length; i++) images[i] = rng.normal();
  const labels = new Int32Array(n);
  for (let i = 0; i < n; i++) labels[i] = rng.int(MICRO.classes);
  return { images, labels, n };
}

describe("evaluateDecoded", () => {
  let dir: string;
  beforeAll(() => {
    dir = fs.mkdtempSync(path.join(os.tmpdir(), "ilwp-eval-"));
  });
  afterAll(() => {
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("identity splice costs exactly zero accuracy", () => {
    const rng = new Rng(5);
    const model = new Model(MICRO, rng, 1 / 3);
    const batch = microBatch(rng, 24);
    // Snap first, as the export pipeline does: the saved store then holds
    // exactly the values the model computes with.
    model.snapDepthwiseToFloat32();
    const wgt = path.join(dir, "identity.wgt");
    fs.writeFileSync(wgt, saveWeightStore(model.exportDepthwise()));

    const result = evaluateDecoded(model, wgt, batch);
    expect(result.delta).toBe(0);
    expect(result.after).toBe(result.before);
  });

  it("restores the model's own kernels afterwards", () => {
    const rng = new Rng(6);
    const model = new Model(MICRO, rng, 1 / 3);
    const batch = microBatch(rng, 8);
    const snapshot = model.depthwiseKernels().map((t) => Float64Array.from(t.data));

    // A deliberately different store: all zeros.
    const zeros = {
      layers: model.depthwiseKernels().map((t) => new Float32Array(t.size)),
    };
    const wgt = path.join(dir, "zeros.wgt");
    fs.writeFileSync(wgt, saveWeightStore(zeros));
    // Zero kernels silence every depthwise stage; the comparison still runs.
    const result = evaluateDecoded(model, wgt, batch);
    expect(Number.isFinite(result.after)).toBe(true);

    const kernels = model.depthwiseKernels();
    for (let i = 0; i < kernels.length; i++) {
      expect(Array.from(kernels[i].data)).toEqual(Array.from(snapshot[i]));
    }
  });

  it("rejects stores whose shape does not match the model", () => {
    const rng = new Rng(7);
    const model = new Model(MICRO, rng, 1 / 3);
    const batch = microBatch(rng, 8);

    const tooFew = { layers: [new Float32Array(4 * 9)] };
    const few = path.join(dir, "few.wgt");
    fs.writeFileSync(few, saveWeightStore(tooFew));
    expect(() => evaluateDecoded(model, few, batch)).toThrow(/1 layers.*2 depthwise/);

    const wrongWidth = { layers: [new Float32Array(4 * 9), new Float32Array(3 * 9)] };
    const wrong = path.join(dir, "wrong.wgt");
    fs.writeFileSync(wrong, saveWeightStore(wrongWidth));
    expect(() => evaluateDecoded(model, wrong, batch)).toThrow(/3 kernels.*expects 4/);
  });
});

describe("model construction", () => {
  it("requires at least two depthwise blocks", () => {
    const arch = { ...MICRO, blockWidths: [4] };
    expect(() => new Model(arch, new Rng(1))).toThrow(/at least 2/);
  });
});
