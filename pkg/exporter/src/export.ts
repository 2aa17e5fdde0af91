/**
 * Pipeline: image -> SVD neighborhood in input space -> forward pass of the
 * base image plus every neighbor -> one bundle layer per selected layer,
 * rows grouped as a single (base, neighbors...) block. Activations are
 * written as float32; the analysis toolkit widens them to float64.
 */

import { forwardAll, Model, SelectedLayer } from './model.js';
import { Image, svdReconstructions } from './neighborhood.js';
import { encodeBundle, LayerRecord, METHOD_SVD } from './ltnt.js';

export interface ExportOptions {
  tailSize: number;
}

export interface ExportStats {
  rowsPerLayer: number;
  layers: { name: string; index: number; dim: number }[];
}

export function buildBundle(
  model: Model,
  image: Image,
  selection: SelectedLayer[],
  options: ExportOptions,
): { bundle: Buffer; stats: ExportStats } {
  if (selection.length === 0) throw new Error('no layers selected');
  const reconstructions = svdReconstructions(image, options.tailSize);
  // the identity mask reproduces the base image; forward the exact base
  // instead so row 0 of every block is the unmodified input
  const inputs = [Float64Array.from(image.data), ...reconstructions.slice(1)];

  const perLayer: Float64Array[][] = selection.map(() => []);
  for (const input of inputs) {
    const activations = forwardAll(model, input);
    selection.forEach((layer, s) => perLayer[s].push(activations[layer.index]));
  }

  const totalLayers = model.layers.length + 1;
  const records: LayerRecord[] = selection.map((layer, s) => {
    const rows = perLayer[s];
    const dim = rows[0].length;
    const data = new Float64Array(rows.length * dim);
    rows.forEach((row, r) => data.set(row, r * dim));
    return {
      name: layer.name,
      layerIndex: layer.index,
      totalLayers,
      tensor: {
        rows: rows.length,
        cols: dim,
        data,
        meta: { kind: 'block', blockSize: rows.length, method: METHOD_SVD },
      },
    };
  });

  return {
    bundle: encodeBundle(records, 'f32'),
    stats: {
      rowsPerLayer: inputs.length,
      layers: selection.map((l, s) => ({ name: l.name, index: l.index, dim: perLayer[s][0].length })),
    },
  };
}
