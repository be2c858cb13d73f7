/**
 * The .wgt weight-store container (little-endian), the file interface this
 * harness shares with the ilwp codec:
 *
 *   "ILWP" | u16 version=1 | u16 reserved=0 | u32 L | L x u32 kernel counts
 *   | for each layer: count x 9 float32
 *
 * Byte length is exactly 12 + 4L + 36 * sum(counts).  Parsing is strict --
 * wrong magic/version, zero layers, zero-kernel layers, truncated or
 * trailing bytes, and non-finite values are all rejected.
 */

const MAGIC = 0x50574c49; // "ILWP" little-endian

export interface WeightStore {
  /** layers[i] is Float32Array of length counts[i] * 9, kernels row-major. */
  layers: Float32Array[];
}

export function saveWeightStore(store: WeightStore): Buffer {
  if (store.layers.length === 0) throw new Error("cannot serialize a store with no layers");
  let total = 12 + 4 * store.layers.length;
  for (const layer of store.layers) {
    if (layer.length === 0 || layer.length % 9 !== 0) {
      throw new Error(`layer length ${layer.length} is not a positive multiple of 9`);
    }
    for (const v of layer) {
      if (!Number.isFinite(v)) throw new Error("non-finite weight value");
    }
    total += 4 * layer.length;
  }
  const buf = Buffer.alloc(total);
  buf.writeUInt32LE(MAGIC, 0);
  buf.writeUInt16LE(1, 4);
  buf.writeUInt16LE(0, 6);
  buf.writeUInt32LE(store.layers.length, 8);
  let off = 12;
  for (const layer of store.layers) {
    buf.writeUInt32LE(layer.length / 9, off);
    off += 4;
  }
  for (const layer of store.layers) {
    for (const v of layer) {
      buf.writeFloatLE(v, off);
      off += 4;
    }
  }
  return buf;
}

export function loadWeightStore(data: Buffer): WeightStore {
  if (data.length < 12) throw new Error("truncated container: missing header");
  if (data.readUInt32LE(0) !== MAGIC) throw new Error("bad magic: not a .wgt container");
  const version = data.readUInt16LE(4);
  if (version !== 1) throw new Error(`unsupported container version ${version}`);
  if (data.readUInt16LE(6) !== 0) throw new Error("reserved header field must be zero");
  const layerCount = data.readUInt32LE(8);
  if (layerCount === 0) throw new Error("container declares zero layers");
  if (data.length < 12 + 4 * layerCount) throw new Error("truncated layer table");

  const counts: number[] = [];
  let expected = 12 + 4 * layerCount;
  for (let i = 0; i < layerCount; i++) {
    const c = data.readUInt32LE(12 + 4 * i);
    if (c === 0) throw new Error(`layer ${i} declares zero kernels`);
    counts.push(c);
    expected += 36 * c;
  }
  if (data.length !== expected) {
    throw new Error(`container is ${data.length} bytes, layer table implies ${expected}`);
  }

  const layers: Float32Array[] = [];
  let off = 12 + 4 * layerCount;
  for (const c of counts) {
    const layer = new Float32Array(c * 9);
    for (let k = 0; k < layer.length; k++) {
      layer[k] = data.readFloatLE(off);
      off += 4;
      if (!Number.isFinite(layer[k])) throw new Error("non-finite weight in container");
    }
    layers.push(layer);
  }
  return { layers };
}
