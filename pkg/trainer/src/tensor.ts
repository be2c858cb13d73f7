/**
 * Minimal reverse-mode autodiff over dense float64 tensors.
 *
 * Every differentiable op appends one node to a tape; backward() seeds the
 * loss gradient with 1 and walks the tape in reverse.  Gradients accumulate
 * into Tensor.grad, so parameters can appear in any number of ops (the
 * inter-layer penalty reads the same kernel tensors the conv ops use).
 */

export class Tensor {
  data: Float64Array;
  shape: number[];
  grad: Float64Array | null = null;
  requiresGrad: boolean;
  /** Set on network inputs: ops skip propagating gradients into this tensor. */
  stopGrad = false;

  constructor(data: Float64Array, shape: number[], requiresGrad = false) {
    const n = shape.reduce((a, b) => a * b, 1);
    if (data.length !== n) {
      throw new Error(`tensor data length ${data.length} != shape ${shape}`);
    }
    this.data = data;
    this.shape = shape;
    this.requiresGrad = requiresGrad;
    if (requiresGrad) this.grad = new Float64Array(n);
  }

  get size(): number {
    return this.data.length;
  }

  static zeros(shape: number[], requiresGrad = false): Tensor {
    const n = shape.reduce((a, b) => a * b, 1);
    return new Tensor(new Float64Array(n), shape, requiresGrad);
  }

  static scalar(v: number): Tensor {
    return new Tensor(Float64Array.of(v), [1]);
  }

  item(): number {
    if (this.size !== 1) throw new Error(`item() on size-${this.size} tensor`);
    return this.data[0];
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }

  /** Ensure a grad buffer exists (used by ops writing into inputs). */
  gradBuffer(): Float64Array {
    if (!this.grad) this.grad = new Float64Array(this.size);
    return this.grad;
  }
}

export class Tape {
  private nodes: Array<() => void> = [];

  record(backward: () => void): void {
    this.nodes.push(backward);
  }

  /** Seed d(loss)/d(loss) = 1 and propagate to every recorded input. */
  backward(loss: Tensor): void {
    if (loss.size !== 1) throw new Error("backward() expects a scalar loss");
    loss.gradBuffer()[0] = 1;
    for (let i = this.nodes.length - 1; i >= 0; i--) this.nodes[i]();
  }

  reset(): void {
    this.nodes.length = 0;
  }
}

export function relu(tape: Tape, x: Tensor): Tensor {
  const out = Tensor.zeros(x.shape);
  for (let i = 0; i < x.size; i++) out.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.gradBuffer();
    for (let i = 0; i < x.size; i++) {
      if (x.data[i] > 0) gx[i] += out.grad![i];
    }
  });
  return out;
}

/** out = a + weight * b, for scalars (classification + weighted penalty). */
export function addScaled(tape: Tape, a: Tensor, b: Tensor, weight: number): Tensor {
  if (a.size !== 1 || b.size !== 1) throw new Error("addScaled expects scalars");
  const out = Tensor.scalar(a.data[0] + weight * b.data[0]);
  tape.record(() => {
    if (!out.grad) return;
    a.gradBuffer()[0] += out.grad[0];
    b.gradBuffer()[0] += weight * out.grad[0];
  });
  return out;
}
