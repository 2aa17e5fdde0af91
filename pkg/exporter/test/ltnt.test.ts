import { describe, expect, it } from 'vitest';

import {
  decodeBundle,
  decodeTensor,
  encodeBundle,
  encodeTensor,
  Tensor,
} from '../src/ltnt.js';

function tensor(rows: number, cols: number, values: number[], meta: Tensor['meta'] = null): Tensor {
  return { rows, cols, data: Float64Array.from(values), meta };
}

describe('LTNT encoding', () => {
  it('round-trips float64 exactly', () => {
    const t = tensor(2, 3, [1.5, -2, 3.25, 4, 5e-12, -6.75]);
    const back = decodeTensor(encodeTensor(t, 'f64'));
    expect(Array.from(back.data)).toEqual(Array.from(t.data));
    expect(back.rows).toBe(2);
    expect(back.cols).toBe(3);
    expect(back.meta).toBeNull();
  });

  it('stores float32 payloads that widen on read', () => {
    const t = tensor(1, 2, [0.1, 0.2]);
    const buf = encodeTensor(t, 'f32');
    expect(buf.readUInt8(5)).toBe(1); // dtype tag
    const back = decodeTensor(buf);
    expect(back.data[0]).toBeCloseTo(0.1, 7);
    expect(back.data[0]).toBe(Math.fround(0.1));
  });

  it('carries image and block sidecars', () => {
    const img = tensor(2, 6, new Array(12).fill(0), {
      kind: 'image',
      height: 2,
      width: 3,
      channels: 2,
    });
    expect(decodeTensor(encodeTensor(img)).meta).toEqual(img.meta);

    const blk = tensor(4, 2, new Array(8).fill(1), { kind: 'block', blockSize: 4, method: 1 });
    expect(decodeTensor(encodeTensor(blk)).meta).toEqual(blk.meta);
  });

  it('rejects trailing bytes', () => {
    const buf = Buffer.concat([encodeTensor(tensor(1, 1, [1])), Buffer.from([0])]);
    expect(() => decodeTensor(buf)).toThrow(/trailing/);
  });

  it('rejects non-finite values', () => {
    expect(() => encodeTensor(tensor(1, 1, [Number.NaN]))).toThrow(/non-finite/);
  });
});

describe('LBND encoding', () => {
  it('round-trips layer records', () => {
    const layers = [0, 1, 2].map((i) => ({
      name: `layer${i}`,
      layerIndex: i,
      totalLayers: 3,
      tensor: tensor(2, 1 + i, new Array(2 * (1 + i)).fill(i + 0.5), {
        kind: 'block' as const,
        blockSize: 2,
        method: 1,
      }),
    }));
    const back = decodeBundle(encodeBundle(layers, 'f64'));
    expect(back.map((l) => l.name)).toEqual(['layer0', 'layer1', 'layer2']);
    expect(back.every((l) => l.totalLayers === 3)).toBe(true);
    expect(back[2].tensor.cols).toBe(3);
    expect(back[1].tensor.meta).toEqual({ kind: 'block', blockSize: 2, method: 1 });
  });
});
