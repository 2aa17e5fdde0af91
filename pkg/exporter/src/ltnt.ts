/**
 * LTNT / LBND binary formats, little-endian throughout.
 *
 * LTNT: magic "LTNT", u8 version=1, u8 dtype (0=f64, 1=f32), u32 rows,
 * u32 cols, u16 extension length, extension bytes, row-major payload.
 * Extension records: "IMGD" + u32 height + u32 width + u32 channels, or
 * "BLK0" + u32 blockSize + u8 method (0 none, 1 svd, 2 knn, 3 affine).
 *
 * LBND: magic "LBND", u32 layer count, then per layer u16 name length,
 * UTF-8 name, u32 layerIndex, u32 totalLayers, embedded LTNT record.
 */

export interface ImageMeta {
  kind: 'image';
  height: number;
  width: number;
  channels: number;
}

export interface BlockMeta {
  kind: 'block';
  blockSize: number;
  method: number;
}

export type TensorMeta = ImageMeta | BlockMeta | null;

export interface Tensor {
  rows: number;
  cols: number;
  /** row-major values, length rows*cols */
  data: Float64Array;
  meta: TensorMeta;
}

export interface LayerRecord {
  name: string;
  layerIndex: number;
  totalLayers: number;
  tensor: Tensor;
}

export const METHOD_SVD = 1;

function encodeExt(meta: TensorMeta): Buffer {
  if (meta === null) return Buffer.alloc(0);
  if (meta.kind === 'image') {
    const buf = Buffer.alloc(16);
    buf.write('IMGD', 0, 'ascii');
    buf.writeUInt32LE(meta.height, 4);
    buf.writeUInt32LE(meta.width, 8);
    buf.writeUInt32LE(meta.channels, 12);
    return buf;
  }
  const buf = Buffer.alloc(9);
  buf.write('BLK0', 0, 'ascii');
  buf.writeUInt32LE(meta.blockSize, 4);
  buf.writeUInt8(meta.method, 8);
  return buf;
}

function decodeExt(ext: Buffer): TensorMeta {
  if (ext.length === 0) return null;
  const tag = ext.toString('ascii', 0, 4);
  if (tag === 'IMGD' && ext.length === 16) {
    return {
      kind: 'image',
      height: ext.readUInt32LE(4),
      width: ext.readUInt32LE(8),
      channels: ext.readUInt32LE(12),
    };
  }
  if (tag === 'BLK0' && ext.length === 9) {
    return { kind: 'block', blockSize: ext.readUInt32LE(4), method: ext.readUInt8(8) };
  }
  throw new Error(`unknown extension block ${tag}`);
}

export function encodeTensor(t: Tensor, dtype: 'f64' | 'f32' = 'f64'): Buffer {
  if (t.data.length !== t.rows * t.cols) {
    throw new Error(`payload length ${t.data.length} != ${t.rows}x${t.cols}`);
  }
  const ext = encodeExt(t.meta);
  const itemSize = dtype === 'f64' ? 8 : 4;
  const head = Buffer.alloc(16 + ext.length);
  head.write('LTNT', 0, 'ascii');
  head.writeUInt8(1, 4);
  head.writeUInt8(dtype === 'f64' ? 0 : 1, 5);
  head.writeUInt32LE(t.rows, 6);
  head.writeUInt32LE(t.cols, 10);
  head.writeUInt16LE(ext.length, 14);
  ext.copy(head, 16);

  const payload = Buffer.alloc(t.data.length * itemSize);
  for (let i = 0; i < t.data.length; i++) {
    if (!Number.isFinite(t.data[i])) throw new Error(`non-finite value at index ${i}`);
    if (dtype === 'f64') payload.writeDoubleLE(t.data[i], i * 8);
    else payload.writeFloatLE(t.data[i], i * 4);
  }
  return Buffer.concat([head, payload]);
}

/** Parse one LTNT record starting at `offset`; returns the next offset. */
export function decodeTensorAt(buf: Buffer, offset: number): { tensor: Tensor; next: number } {
  if (buf.toString('ascii', offset, offset + 4) !== 'LTNT') {
    throw new Error(`no LTNT magic at offset ${offset}`);
  }
  const version = buf.readUInt8(offset + 4);
  if (version !== 1) throw new Error(`unsupported version ${version}`);
  const dtype = buf.readUInt8(offset + 5);
  const rows = buf.readUInt32LE(offset + 6);
  const cols = buf.readUInt32LE(offset + 10);
  const extLen = buf.readUInt16LE(offset + 14);
  const meta = decodeExt(buf.subarray(offset + 16, offset + 16 + extLen));
  const itemSize = dtype === 0 ? 8 : 4;
  let pos = offset + 16 + extLen;
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = dtype === 0 ? buf.readDoubleLE(pos) : buf.readFloatLE(pos);
    pos += itemSize;
  }
  return { tensor: { rows, cols, data, meta }, next: pos };
}

export function decodeTensor(buf: Buffer): Tensor {
  const { tensor, next } = decodeTensorAt(buf, 0);
  if (next !== buf.length) throw new Error(`${buf.length - next} trailing bytes`);
  return tensor;
}

export function encodeBundle(layers: LayerRecord[], dtype: 'f64' | 'f32' = 'f32'): Buffer {
  const parts: Buffer[] = [];
  const head = Buffer.alloc(8);
  head.write('LBND', 0, 'ascii');
  head.writeUInt32LE(layers.length, 4);
  parts.push(head);
  for (const layer of layers) {
    const name = Buffer.from(layer.name, 'utf-8');
    const rec = Buffer.alloc(10 + name.length);
    rec.writeUInt16LE(name.length, 0);
    name.copy(rec, 2);
    rec.writeUInt32LE(layer.layerIndex, 2 + name.length);
    rec.writeUInt32LE(layer.totalLayers, 6 + name.length);
    parts.push(rec, encodeTensor(layer.tensor, dtype));
  }
  return Buffer.concat(parts);
}

export function decodeBundle(buf: Buffer): LayerRecord[] {
  if (buf.toString('ascii', 0, 4) !== 'LBND') throw new Error('no LBND magic');
  const count = buf.readUInt32LE(4);
  let pos = 8;
  const layers: LayerRecord[] = [];
  for (let i = 0; i < count; i++) {
    const nameLen = buf.readUInt16LE(pos);
    const name = buf.toString('utf-8', pos + 2, pos + 2 + nameLen);
    const layerIndex = buf.readUInt32LE(pos + 2 + nameLen);
    const totalLayers = buf.readUInt32LE(pos + 6 + nameLen);
    const { tensor, next } = decodeTensorAt(buf, pos + 10 + nameLen);
    layers.push({ name, layerIndex, totalLayers, tensor });
    pos = next;
  }
  if (pos !== buf.length) throw new Error(`${buf.length - pos} trailing bytes`);
  return layers;
}
