/**
 * SVD-truncation neighborhood, mirroring the analysis toolkit: each channel
 * is decomposed once and every bitmask over the `tailSize` smallest singular
 * values yields one reconstruction (bit j addresses the (j+1)-th smallest).
 * The all-zeros mask reproduces the image, so the base point belongs to its
 * own neighborhood; byte-identical reconstructions are deduplicated.
 */

import { jacobiSvd, reconstruct, Svd } from './linalg.js';
import { Tensor } from './ltnt.js';

export interface Image {
  channels: number;
  height: number;
  width: number;
  /** channel-major planes, length c*m*n */
  data: Float64Array;
}

export function imageFromTensor(t: Tensor): Image {
  if (t.meta === null || t.meta.kind !== 'image') {
    throw new Error('tensor has no image sidecar (IMGD extension)');
  }
  const { height, width, channels } = t.meta;
  if (t.rows !== channels || t.cols !== height * width) {
    throw new Error(
      `image sidecar (${channels}, ${height}x${width}) disagrees with tensor ${t.rows}x${t.cols}`,
    );
  }
  return { channels, height, width, data: Float64Array.from(t.data) };
}

/**
 * All 2^tailSize reconstructions in mask order (mask 0 = identity), after
 * exact-byte dedup. Row layout matches the flattened image (channel-major).
 */
export function svdReconstructions(img: Image, tailSize: number): Float64Array[] {
  const { channels, height: m, width: n } = img;
  const q = Math.min(m, n);
  const svds: Svd[] = [];
  const spectra: Float64Array[] = [];
  for (let c = 0; c < channels; c++) {
    const plane = img.data.subarray(c * m * n, (c + 1) * m * n);
    const svd = jacobiSvd(Float64Array.from(plane), m, n);
    // clamp numerical noise so masks over absent singular values are no-ops
    const tol = Math.max(m, n) * Number.EPSILON * (svd.s[0] ?? 0);
    for (let i = 0; i < svd.s.length; i++) if (svd.s[i] <= tol) svd.s[i] = 0;
    svds.push(svd);
    spectra.push(Float64Array.from(svd.s));
  }

  const nMasks = 1 << tailSize;
  const rows: Float64Array[] = [];
  const seen = new Set<string>();
  for (let maskIdx = 0; maskIdx < nMasks; maskIdx++) {
    const row = new Float64Array(channels * m * n);
    for (let c = 0; c < channels; c++) {
      const spectrum = Float64Array.from(spectra[c]);
      for (let bit = 0; bit < tailSize; bit++) {
        const on = (maskIdx >> (tailSize - 1 - bit)) & 1;
        const idx = q - 1 - bit;
        if (on && idx >= 0) spectrum[idx] = 0;
      }
      row.set(reconstruct(svds[c], spectrum), c * m * n);
    }
    const key = Buffer.from(row.buffer, row.byteOffset, row.byteLength).toString('base64');
    if (!seen.has(key)) {
      seen.add(key);
      rows.push(row);
    }
  }
  return rows;
}
