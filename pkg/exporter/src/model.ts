/**
 * JSON-checkpoint dense networks. A checkpoint is
 *   {"layers": [{"name", "weight" (out x in), "bias", "activation"}, ...]}
 * with activation "relu" | "identity" | "tanh". The pseudo-layer "input"
 * (index 0) exposes the flattened input itself; model layers follow at
 * indices 1..L, so totalLayers = L + 1.
 */

import { readFileSync } from 'node:fs';

import { affine } from './linalg.js';

export type Activation = 'relu' | 'identity' | 'tanh';

export interface DenseLayer {
  name: string;
  weight: number[][];
  bias: number[];
  activation: Activation;
}

export interface Model {
  layers: DenseLayer[];
}

const ACTIVATIONS: Record<Activation, (x: number) => number> = {
  relu: (x) => (x > 0 ? x : 0),
  identity: (x) => x,
  tanh: Math.tanh,
};

export function loadModel(path: string): Model {
  let payload: unknown;
  try {
    payload = JSON.parse(readFileSync(path, 'utf-8'));
  } catch (err) {
    throw new Error(`cannot load checkpoint ${path}: ${err}`);
  }
  const layers = (payload as Model).layers;
  if (!Array.isArray(layers) || layers.length === 0) {
    throw new Error(`checkpoint ${path} has no layers`);
  }
  for (const layer of layers) {
    if (!layer.name || !Array.isArray(layer.weight) || !Array.isArray(layer.bias)) {
      throw new Error(`checkpoint ${path}: malformed layer ${JSON.stringify(layer?.name)}`);
    }
    if (!(layer.activation in ACTIVATIONS)) {
      throw new Error(`checkpoint ${path}: unknown activation ${layer.activation}`);
    }
    if (layer.weight.length !== layer.bias.length) {
      throw new Error(`layer ${layer.name}: weight rows ${layer.weight.length} != bias ${layer.bias.length}`);
    }
  }
  return { layers };
}

/** Post-activation values for every layer, input included as entry 0. */
export function forwardAll(model: Model, input: Float64Array): Float64Array[] {
  const captured: Float64Array[] = [Float64Array.from(input)];
  let current = input;
  for (const layer of model.layers) {
    const z = affine(layer.weight, layer.bias, current);
    const act = ACTIVATIONS[layer.activation];
    for (let i = 0; i < z.length; i++) z[i] = act(z[i]);
    captured.push(z);
    current = z;
  }
  return captured;
}

export interface SelectedLayer {
  name: string;
  /** absolute position: 0 = input, 1..L = model layers */
  index: number;
}

export function selectLayers(model: Model, spec: string): SelectedLayer[] {
  const all: SelectedLayer[] = [
    { name: 'input', index: 0 },
    ...model.layers.map((l, i) => ({ name: l.name, index: i + 1 })),
  ];
  if (spec === 'auto') return all;
  const byName = new Map(all.map((l) => [l.name, l]));
  return spec.split(',').map((raw) => {
    const name = raw.trim();
    const found = byName.get(name);
    if (!found) {
      throw new Error(`layer ${name} not found; available: ${all.map((l) => l.name).join(', ')}`);
    }
    return found;
  });
}
