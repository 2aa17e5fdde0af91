#!/usr/bin/env node
/**
 * export_latents --arch json --ckpt model.json --image img.ltnt \
 *   --layers auto --tail 10 --out layers.lbnd
 *
 * Supported checkpoints: JSON dense networks (see model.ts). The image must
 * be an LTNT file with an image sidecar, as written by the analysis
 * toolkit's save_image.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { buildBundle } from './export.js';
import { decodeTensor } from './ltnt.js';
import { loadModel, selectLayers } from './model.js';
import { imageFromTensor } from './neighborhood.js';

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .option('arch', { type: 'string', default: 'json', describe: 'checkpoint format' })
    .option('ckpt', { type: 'string', demandOption: true, describe: 'checkpoint path' })
    .option('image', { type: 'string', demandOption: true, describe: 'input image (.ltnt with image sidecar)' })
    .option('layers', { type: 'string', default: 'auto', describe: '"auto" or comma-separated layer names' })
    .option('tail', { type: 'number', default: 10, describe: 'tail singular values per channel' })
    .option('out', { type: 'string', demandOption: true, describe: 'output bundle path (.lbnd)' })
    .strict()
    .parse();

  if (args.arch !== 'json') {
    throw new Error(
      `unsupported arch "${args.arch}": this exporter loads JSON dense checkpoints only`,
    );
  }
  const model = loadModel(args.ckpt);
  const image = imageFromTensor(decodeTensor(readFileSync(args.image)));
  const selection = selectLayers(model, args.layers);
  const { bundle, stats } = buildBundle(model, image, selection, { tailSize: args.tail });
  writeFileSync(args.out, bundle);
  console.log(
    `wrote ${stats.layers.length} layers x ${stats.rowsPerLayer} rows to ${args.out} ` +
      `(${stats.layers.map((l) => `${l.name}:${l.dim}`).join(', ')})`,
  );
  return 0;
}

const isDirectRun = process.argv[1]?.endsWith('cli.js') || process.argv[1]?.endsWith('export_latents');
if (isDirectRun) {
  main(hideBin(process.argv)).catch((err) => {
    console.error(String(err?.message ?? err));
    process.exit(1);
  });
}
