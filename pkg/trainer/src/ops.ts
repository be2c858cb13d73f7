/**
 * Network layers as tape ops: convolutions in NCHW with hand-rolled loops,
 * pooling, a dense head, and softmax cross-entropy.  All 3x3 convolutions
 * use stride 1 and zero padding 1, so spatial size is preserved and the
 * depthwise kernels keep the 3x3 footprint the codec's containers expect.
 */

import { Tape, Tensor } from "./tensor";

function at(c: number, h: number, w: number, H: number, W: number): number {
  return (c * H + h) * W + w;
}

/** Standard 3x3 convolution (the stem).  w: [cout, cin, 3, 3], b: [cout]. */
export function conv3x3(tape: Tape, x: Tensor, w: Tensor, b: Tensor): Tensor {
  const [N, Cin, H, W] = x.shape;
  const Cout = w.shape[0];
  if (w.shape[1] !== Cin) throw new Error("conv3x3: channel mismatch");
  const out = Tensor.zeros([N, Cout, H, W]);
  const plane = H * W;
  for (let n = 0; n < N; n++) {
    const xo = n * Cin * plane;
    const oo = n * Cout * plane;
    for (let co = 0; co < Cout; co++) {
      const wBase = co * Cin * 9;
      for (let h = 0; h < H; h++) {
        for (let ww = 0; ww < W; ww++) {
          let acc = b.data[co];
          for (let ci = 0; ci < Cin; ci++) {
            const wb = wBase + ci * 9;
            for (let kh = 0; kh < 3; kh++) {
              const ih = h + kh - 1;
              if (ih < 0 || ih >= H) continue;
              for (let kw = 0; kw < 3; kw++) {
                const iw = ww + kw - 1;
                if (iw < 0 || iw >= W) continue;
                acc += w.data[wb + kh * 3 + kw] * x.data[xo + at(ci, ih, iw, H, W)];
              }
            }
          }
          out.data[oo + at(co, h, ww, H, W)] = acc;
        }
      }
    }
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.stopGrad ? null : x.gradBuffer();
    const gw = w.gradBuffer();
    const gb = b.gradBuffer();
    for (let n = 0; n < N; n++) {
      const xo = n * Cin * plane;
      const oo = n * Cout * plane;
      for (let co = 0; co < Cout; co++) {
        const wBase = co * Cin * 9;
        for (let h = 0; h < H; h++) {
          for (let ww = 0; ww < W; ww++) {
            const g = out.grad[oo + at(co, h, ww, H, W)];
            if (g === 0) continue;
            gb[co] += g;
            for (let ci = 0; ci < Cin; ci++) {
              const wb = wBase + ci * 9;
              for (let kh = 0; kh < 3; kh++) {
                const ih = h + kh - 1;
                if (ih < 0 || ih >= H) continue;
                for (let kw = 0; kw < 3; kw++) {
                  const iw = ww + kw - 1;
                  if (iw < 0 || iw >= W) continue;
                  const xi = xo + at(ci, ih, iw, H, W);
                  gw[wb + kh * 3 + kw] += g * x.data[xi];
                  if (gx) gx[xi] += g * w.data[wb + kh * 3 + kw];
                }
              }
            }
          }
        }
      }
    }
  });
  return out;
}

/** Depthwise 3x3 convolution.  w: [C, 3, 3] -- one kernel per channel. */
export function dwConv3x3(tape: Tape, x: Tensor, w: Tensor): Tensor {
  const [N, C, H, W] = x.shape;
  if (w.shape[0] !== C) throw new Error("dwConv3x3: channel mismatch");
  const out = Tensor.zeros([N, C, H, W]);
  const plane = H * W;
  for (let n = 0; n < N; n++) {
    const base = n * C * plane;
    for (let c = 0; c < C; c++) {
      const wb = c * 9;
      const cb = base + c * plane;
      for (let h = 0; h < H; h++) {
        for (let ww = 0; ww < W; ww++) {
          let acc = 0;
          for (let kh = 0; kh < 3; kh++) {
            const ih = h + kh - 1;
            if (ih < 0 || ih >= H) continue;
            for (let kw = 0; kw < 3; kw++) {
              const iw = ww + kw - 1;
              if (iw < 0 || iw >= W) continue;
              acc += w.data[wb + kh * 3 + kw] * x.data[cb + ih * W + iw];
            }
          }
          out.data[cb + h * W + ww] = acc;
        }
      }
    }
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.stopGrad ? null : x.gradBuffer();
    const gw = w.gradBuffer();
    for (let n = 0; n < N; n++) {
      const base = n * C * plane;
      for (let c = 0; c < C; c++) {
        const wb = c * 9;
        const cb = base + c * plane;
        for (let h = 0; h < H; h++) {
          for (let ww = 0; ww < W; ww++) {
            const g = out.grad[cb + h * W + ww];
            if (g === 0) continue;
            for (let kh = 0; kh < 3; kh++) {
              const ih = h + kh - 1;
              if (ih < 0 || ih >= H) continue;
              for (let kw = 0; kw < 3; kw++) {
                const iw = ww + kw - 1;
                if (iw < 0 || iw >= W) continue;
                gw[wb + kh * 3 + kw] += g * x.data[cb + ih * W + iw];
                if (gx) gx[cb + ih * W + iw] += g * w.data[wb + kh * 3 + kw];
              }
            }
          }
        }
      }
    }
  });
  return out;
}

/** Pointwise (1x1) convolution.  w: [cout, cin], b: [cout]. */
export function pwConv(tape: Tape, x: Tensor, w: Tensor, b: Tensor): Tensor {
  const [N, Cin, H, W] = x.shape;
  const Cout = w.shape[0];
  if (w.shape[1] !== Cin) throw new Error("pwConv: channel mismatch");
  const plane = H * W;
  const out = Tensor.zeros([N, Cout, H, W]);
  for (let n = 0; n < N; n++) {
    const xo = n * Cin * plane;
    const oo = n * Cout * plane;
    for (let co = 0; co < Cout; co++) {
      const ob = oo + co * plane;
      out.data.fill(b.data[co], ob, ob + plane);
      for (let ci = 0; ci < Cin; ci++) {
        const wv = w.data[co * Cin + ci];
        if (wv === 0) continue;
        const xb = xo + ci * plane;
        for (let p = 0; p < plane; p++) out.data[ob + p] += wv * x.data[xb + p];
      }
    }
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.stopGrad ? null : x.gradBuffer();
    const gw = w.gradBuffer();
    const gb = b.gradBuffer();
    for (let n = 0; n < N; n++) {
      const xo = n * Cin * plane;
      const oo = n * Cout * plane;
      for (let co = 0; co < Cout; co++) {
        const ob = oo + co * plane;
        for (let ci = 0; ci < Cin; ci++) {
          const xb = xo + ci * plane;
          let acc = 0;
          const wv = w.data[co * Cin + ci];
          for (let p = 0; p < plane; p++) {
            const g = out.grad[ob + p];
            acc += g * x.data[xb + p];
            if (gx) gx[xb + p] += g * wv;
          }
          gw[co * Cin + ci] += acc;
        }
        let bacc = 0;
        for (let p = 0; p < plane; p++) bacc += out.grad[ob + p];
        gb[co] += bacc;
      }
    }
  });
  return out;
}

/** 2x2 average pooling, stride 2.  Spatial dims must be even. */
export function avgPool2(tape: Tape, x: Tensor): Tensor {
  const [N, C, H, W] = x.shape;
  if (H % 2 || W % 2) throw new Error(`avgPool2 needs even dims, got ${H}x${W}`);
  const Ho = H / 2, Wo = W / 2;
  const out = Tensor.zeros([N, C, Ho, Wo]);
  for (let nc = 0; nc < N * C; nc++) {
    const xb = nc * H * W;
    const ob = nc * Ho * Wo;
    for (let h = 0; h < Ho; h++) {
      for (let w = 0; w < Wo; w++) {
        const i = xb + 2 * h * W + 2 * w;
        out.data[ob + h * Wo + w] =
          0.25 * (x.data[i] + x.data[i + 1] + x.data[i + W] + x.data[i + W + 1]);
      }
    }
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.gradBuffer();
    for (let nc = 0; nc < N * C; nc++) {
      const xb = nc * H * W;
      const ob = nc * Ho * Wo;
      for (let h = 0; h < Ho; h++) {
        for (let w = 0; w < Wo; w++) {
          const g = 0.25 * out.grad[ob + h * Wo + w];
          const i = xb + 2 * h * W + 2 * w;
          gx[i] += g;
          gx[i + 1] += g;
          gx[i + W] += g;
          gx[i + W + 1] += g;
        }
      }
    }
  });
  return out;
}

/** Global average pool: [N, C, H, W] -> [N, C]. */
export function globalAvgPool(tape: Tape, x: Tensor): Tensor {
  const [N, C, H, W] = x.shape;
  const plane = H * W;
  const out = Tensor.zeros([N, C]);
  for (let nc = 0; nc < N * C; nc++) {
    let acc = 0;
    const b = nc * plane;
    for (let p = 0; p < plane; p++) acc += x.data[b + p];
    out.data[nc] = acc / plane;
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.gradBuffer();
    for (let nc = 0; nc < N * C; nc++) {
      const g = out.grad[nc] / plane;
      const b = nc * plane;
      for (let p = 0; p < plane; p++) gx[b + p] += g;
    }
  });
  return out;
}

/** Dense head.  x: [N, F], w: [K, F], b: [K] -> [N, K]. */
export function linear(tape: Tape, x: Tensor, w: Tensor, b: Tensor): Tensor {
  const [N, F] = x.shape;
  const K = w.shape[0];
  if (w.shape[1] !== F) throw new Error("linear: feature mismatch");
  const out = Tensor.zeros([N, K]);
  for (let n = 0; n < N; n++) {
    for (let k = 0; k < K; k++) {
      let acc = b.data[k];
      const wb = k * F, xb = n * F;
      for (let f = 0; f < F; f++) acc += w.data[wb + f] * x.data[xb + f];
      out.data[n * K + k] = acc;
    }
  }
  tape.record(() => {
    if (!out.grad) return;
    const gx = x.gradBuffer();
    const gw = w.gradBuffer();
    const gb = b.gradBuffer();
    for (let n = 0; n < N; n++) {
      for (let k = 0; k < K; k++) {
        const g = out.grad[n * K + k];
        if (g === 0) continue;
        gb[k] += g;
        const wb = k * F, xb = n * F;
        for (let f = 0; f < F; f++) {
          gw[wb + f] += g * x.data[xb + f];
          gx[xb + f] += g * w.data[wb + f];
        }
      }
    }
  });
  return out;
}

/** Mean softmax cross-entropy over a batch of logits [N, K]. */
export function crossEntropy(tape: Tape, logits: Tensor, labels: Int32Array): Tensor {
  const [N, K] = logits.shape;
  if (labels.length !== N) throw new Error("crossEntropy: label count mismatch");
  const probs = new Float64Array(N * K);
  let loss = 0;
  for (let n = 0; n < N; n++) {
    const b = n * K;
    let mx = -Infinity;
    for (let k = 0; k < K; k++) mx = Math.max(mx, logits.data[b + k]);
    let z = 0;
    for (let k = 0; k < K; k++) {
      probs[b + k] = Math.exp(logits.data[b + k] - mx);
      z += probs[b + k];
    }
    for (let k = 0; k < K; k++) probs[b + k] /= z;
    loss -= Math.log(probs[b + labels[n]]);
  }
  const out = Tensor.scalar(loss / N);
  tape.record(() => {
    if (!out.grad) return;
    const g = out.grad[0] / N;
    const gl = logits.gradBuffer();
    for (let n = 0; n < N; n++) {
      const b = n * K;
      for (let k = 0; k < K; k++) {
        gl[b + k] += g * (probs[b + k] - (k === labels[n] ? 1 : 0));
      }
    }
  });
  return out;
}
