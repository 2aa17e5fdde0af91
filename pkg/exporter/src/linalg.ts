/**
 * Dense helpers for small matrices: the exporter only ever decomposes
 * per-channel image matrices (tens of rows/cols), so a one-sided Jacobi
 * SVD is plenty and keeps the toolchain dependency-free.
 */

export interface Svd {
  /** left singular vectors, m x k column-major-by-index access u[i*k+j] */
  u: Float64Array;
  s: Float64Array;
  /** right singular vectors, n x k */
  v: Float64Array;
  m: number;
  n: number;
  k: number;
}

/** One-sided Jacobi SVD of an m x n row-major matrix (k = min(m, n)). */
export function jacobiSvd(a: Float64Array, m: number, n: number): Svd {
  if (m < n) {
    const t = jacobiSvd(transpose(a, m, n), n, m);
    return { u: t.v, s: t.s, v: t.u, m, n, k: t.k };
  }
  // work on columns of a copy of A; accumulate rotations into V
  const w = Float64Array.from(a);
  const v = new Float64Array(n * n);
  for (let i = 0; i < n; i++) v[i * n + i] = 1;

  const col = (j: number, i: number) => w[i * n + j];
  const maxSweeps = 60;
  const eps = Number.EPSILON;
  for (let sweep = 0; sweep < maxSweeps; sweep++) {
    let offDiag = 0;
    for (let p = 0; p < n - 1; p++) {
      for (let q = p + 1; q < n; q++) {
        let app = 0;
        let aqq = 0;
        let apq = 0;
        for (let i = 0; i < m; i++) {
          const cp = col(p, i);
          const cq = col(q, i);
          app += cp * cp;
          aqq += cq * cq;
          apq += cp * cq;
        }
        offDiag = Math.max(offDiag, Math.abs(apq) / Math.sqrt(app * aqq || eps));
        if (Math.abs(apq) <= 1e-15 * Math.sqrt(app * aqq)) continue;
        const tau = (aqq - app) / (2 * apq);
        const t = Math.sign(tau || 1) / (Math.abs(tau) + Math.sqrt(1 + tau * tau));
        const c = 1 / Math.sqrt(1 + t * t);
        const s = c * t;
        for (let i = 0; i < m; i++) {
          const cp = col(p, i);
          const cq = col(q, i);
          w[i * n + p] = c * cp - s * cq;
          w[i * n + q] = s * cp + c * cq;
        }
        for (let i = 0; i < n; i++) {
          const vp = v[i * n + p];
          const vq = v[i * n + q];
          v[i * n + p] = c * vp - s * vq;
          v[i * n + q] = s * vp + c * vq;
        }
      }
    }
    if (offDiag < 1e-14) break;
  }

  const norms = new Float64Array(n);
  for (let j = 0; j < n; j++) {
    let sum = 0;
    for (let i = 0; i < m; i++) sum += col(j, i) * col(j, i);
    norms[j] = Math.sqrt(sum);
  }
  const order = Array.from({ length: n }, (_, j) => j).sort((x, y) => norms[y] - norms[x]);

  const s = new Float64Array(n);
  const u = new Float64Array(m * n);
  const vOut = new Float64Array(n * n);
  order.forEach((j, idx) => {
    s[idx] = norms[j];
    const inv = norms[j] > 0 ? 1 / norms[j] : 0;
    for (let i = 0; i < m; i++) u[i * n + idx] = col(j, i) * inv;
    for (let i = 0; i < n; i++) vOut[i * n + idx] = v[i * n + j];
  });
  return { u, s, v: vOut, m, n, k: n };
}

export function transpose(a: Float64Array, m: number, n: number): Float64Array {
  const out = new Float64Array(m * n);
  for (let i = 0; i < m; i++) for (let j = 0; j < n; j++) out[j * m + i] = a[i * n + j];
  return out;
}

/** Rebuild m x n matrix U * diag(s) * V^T with a caller-modified spectrum. */
export function reconstruct(svd: Svd, spectrum: Float64Array): Float64Array {
  const { u, v, m, n, k } = svd;
  const out = new Float64Array(m * n);
  for (let r = 0; r < k; r++) {
    const sr = spectrum[r];
    if (sr === 0) continue;
    for (let i = 0; i < m; i++) {
      const uir = u[i * k + r] * sr;
      if (uir === 0) continue;
      for (let j = 0; j < n; j++) out[i * n + j] += uir * v[j * k + r];
    }
  }
  return out;
}

/** y = W x + b for a row-major (out x in) weight matrix. */
export function affine(weight: number[][], bias: number[], x: Float64Array): Float64Array {
  const out = new Float64Array(weight.length);
  for (let i = 0; i < weight.length; i++) {
    let acc = bias[i];
    const row = weight[i];
    for (let j = 0; j < row.length; j++) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}
