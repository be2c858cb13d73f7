/** SGD with Nesterov momentum 0.9; learning rate starts at 0.1 and is
 *  multiplied by 0.98 after every epoch.  Optional global-norm gradient
 *  clipping -- the network has no normalization layers, so deep configs
 *  need it to survive the occasional spike batch. */

import { Tensor } from "./tensor";

export class Sgd {
  private velocity: Float64Array[];
  lr: number;
  readonly momentum: number;
  readonly decay: number;
  readonly clipNorm: number | null;

  constructor(
    private params: Tensor[],
    lr = 0.1,
    momentum = 0.9,
    decay = 0.98,
    clipNorm: number | null = null,
  ) {
    this.lr = lr;
    this.momentum = momentum;
    this.decay = decay;
    this.clipNorm = clipNorm;
    this.velocity = params.map((p) => new Float64Array(p.size));
  }

  step(): void {
    let scale = 1;
    if (this.clipNorm !== null) {
      let sq = 0;
      for (const p of this.params) {
        if (!p.grad) continue;
        for (let k = 0; k < p.size; k++) sq += p.grad[k] * p.grad[k];
      }
      const norm = Math.sqrt(sq);
      if (norm > this.clipNorm) scale = this.clipNorm / norm;
    }
    for (let i = 0; i < this.params.length; i++) {
      const p = this.params[i];
      if (!p.grad) continue;
      const v = this.velocity[i];
      for (let k = 0; k < p.size; k++) {
        const g = scale * p.grad[k];
        v[k] = this.momentum * v[k] + g;
        // Nesterov: apply the gradient plus the look-ahead momentum term.
        p.data[k] -= this.lr * (g + this.momentum * v[k]);
      }
    }
  }

  zeroGrad(): void {
    for (const p of this.params) p.zeroGrad();
  }

  endEpoch(): void {
    this.lr *= this.decay;
  }
}
