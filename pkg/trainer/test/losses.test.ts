import { describe, expect, it } from "vitest";
import { interLayerLoss, totalLoss } from "../src/losses";
import { Rng } from "../src/rng";
import { Tape, Tensor } from "../src/tensor";

/** Kernel tensor for `c` channels from a flat list of c*9 values. */
function layer(values: number[]): Tensor {
  if (values.length % 9 !== 0) throw new Error("test fixture: need 9 per kernel");
  return new Tensor(Float64Array.from(values), [values.length / 9, 3, 3], true);
}

function randomLayer(rng: Rng, c: number): Tensor {
  const t = Tensor.zeros([c, 3, 3], true);
  for (let i = 0; i < t.size; i++) t.data[i] = rng.normal();
  return t;
}

/** Independent re-implementation: plain double loop over predicted layers. */
function oracle(kernels: Tensor[], reverse = false): number {
  let z = 0;
  for (let i = 1; i < kernels.length; i++) z += kernels[i].size;
  let acc = 0;
  const order = [...Array(kernels.length).keys()].slice(1);
  if (reverse) order.reverse();
  for (const i of order) {
    const cPrev = kernels[i - 1].size / 9;
    const entries: number[] = [];
    for (let j = 0; j < kernels[i].size / 9; j++) {
      for (let e = 0; e < 9; e++) {
        entries.push(Math.abs(kernels[i].data[j * 9 + e] - kernels[i - 1].data[(j % cPrev) * 9 + e]));
      }
    }
    if (reverse) entries.reverse();
    for (const v of entries) acc += v;
  }
  return acc / z;
}

describe("interLayerLoss", () => {
  it("is exactly zero when every layer repeats the previous one", () => {
    const base = Array.from({ length: 18 }, (_, i) => Math.sin(i));
    const kernels = [layer(base), layer(base), layer(base)];
    expect(interLayerLoss(new Tape(), kernels).item()).toBe(0);
  });

  it("matches the worked example: one kernel offset by 0.1 across two 2-channel layers", () => {
    const base = [0.3, -0.2, 0.05, 1.0, -1.0, 0.4, 0.0, 0.7, -0.3,
                  -0.6, 0.2, 0.9, -0.1, 0.0, 0.25, 0.5, -0.5, 0.1];
    const shifted = base.map((v, i) => (i < 9 ? v + 0.1 : v));
    // Z = 18 summed elements, total deviation 9 * 0.1 => 0.05.
    const loss = interLayerLoss(new Tape(), [layer(base), layer(shifted)]).item();
    expect(loss).toBeCloseTo(0.05, 12);
  });

  it("agrees with a double-loop oracle on ragged kernel counts", () => {
    const rng = new Rng(42);
    const kernels = [randomLayer(rng, 3), randomLayer(rng, 5), randomLayer(rng, 4)];
    const got = interLayerLoss(new Tape(), kernels).item();
    expect(got).toBeCloseTo(oracle(kernels), 12);
  });

  it("is invariant to summation order", () => {
    const rng = new Rng(99);
    const kernels = [randomLayer(rng, 4), randomLayer(rng, 7), randomLayer(rng, 2)];
    expect(oracle(kernels, true)).toBeCloseTo(oracle(kernels, false), 12);
    expect(interLayerLoss(new Tape(), kernels).item()).toBeCloseTo(oracle(kernels, true), 12);
  });

  it("rejects a single layer", () => {
    expect(() => interLayerLoss(new Tape(), [randomLayer(new Rng(1), 3)]))
      .toThrow(/at least 2/);
  });

  it("rejects tensors that are not whole 3x3 kernels", () => {
    const bad = new Tensor(new Float64Array(10), [10], true);
    expect(() => interLayerLoss(new Tape(), [bad, bad])).toThrow(/9 per kernel/);
  });

  it("backpropagates +-1/Z signs to the right elements, zero at exact matches", () => {
    const prev = layer([0, 0, 0, 0, 0, 0, 0, 0, 0]);
    const cur = layer([0.2, -0.3, 0, 0, 0, 0, 0, 0, 0]);
    const tape = new Tape();
    const loss = interLayerLoss(tape, [prev, cur]);
    tape.backward(loss);
    const z = 9;
    expect(cur.grad![0]).toBeCloseTo(1 / z, 15);
    expect(cur.grad![1]).toBeCloseTo(-1 / z, 15);
    expect(cur.grad![2]).toBe(0); // subgradient of |.| at 0
    expect(prev.grad![0]).toBeCloseTo(-1 / z, 15);
    expect(prev.grad![1]).toBeCloseTo(1 / z, 15);
    expect(prev.grad![2]).toBe(0);
  });

  it("pulls every successor's gradient into a shared reference kernel", () => {
    // prev has 1 kernel, cur has 3 kernels referencing it via j mod 1.
    const prev = layer(Array(9).fill(0));
    const cur = layer([...Array(9).fill(0.5), ...Array(9).fill(0.5), ...Array(9).fill(-0.5)]);
    const tape = new Tape();
    tape.backward(interLayerLoss(tape, [prev, cur]));
    // Z = 27; references accumulate -(+1) -(+1) -(-1) = -1 sign unit each element.
    expect(prev.grad![4]).toBeCloseTo(-1 / 27, 15);
  });
});

describe("totalLoss", () => {
  it("reduces to the classification loss at lambda 0", () => {
    const tape = new Tape();
    const cls = Tensor.scalar(1.75);
    const il = Tensor.scalar(0.4);
    expect(totalLoss(tape, cls, il, 0).item()).toBe(1.75);
  });

  it("adds the weighted penalty: cls 2.0 + 1 * il 0.05 = 2.05", () => {
    const out = totalLoss(new Tape(), Tensor.scalar(2.0), Tensor.scalar(0.05), 1);
    expect(out.item()).toBeCloseTo(2.05, 12);
  });

  it("rejects negative and non-numeric lambda", () => {
    const mk = () => [new Tape(), Tensor.scalar(1), Tensor.scalar(1)] as const;
    expect(() => totalLoss(...mk(), -0.5)).toThrow(/non-negative/);
    expect(() => totalLoss(...mk(), Number.NaN)).toThrow(/non-negative/);
  });

  it("routes gradients to both terms with the lambda weight", () => {
    const tape = new Tape();
    const cls = Tensor.scalar(2.0);
    cls.requiresGrad = true;
    const il = Tensor.scalar(0.05);
    il.requiresGrad = true;
    tape.backward(totalLoss(tape, cls, il, 0.25));
    expect(cls.grad![0]).toBe(1);
    expect(il.grad![0]).toBe(0.25);
  });
});
