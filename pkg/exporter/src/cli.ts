/**
 * CLI: convert checkpoints to the weight container, or generate a synthetic
 * container for testing.
 *
 *   node dist/cli.js --checkpoint enc.safetensors --checkpoint dec.safetensors \
 *        --mode concat --out weights.bin [--name-map map.json]
 *   node dist/cli.js --synthetic --seed 42 --mode concat --out weights.bin
 */

import * as fs from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { writeContainer } from "./container.js";
import { exportFromCheckpoints } from "./export.js";
import { syntheticTensors } from "./synthetic.js";
import type { UnpoolMode } from "./shapes.js";

export function run(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      checkpoint: { type: "string", multiple: true },
      out: { type: "string" },
      mode: { type: "string", default: "concat" },
      "name-map": { type: "string" },
      synthetic: { type: "boolean", default: false },
      seed: { type: "string", default: "42" },
    },
  });
  const mode = values.mode as string;
  if (mode !== "sum" && mode !== "concat") {
    console.error(`error: --mode must be sum or concat, got ${mode}`);
    return 2;
  }
  if (!values.out) {
    console.error("error: --out is required");
    return 2;
  }
  try {
    if (values.synthetic) {
      const seed = Number.parseInt(values.seed as string, 10);
      fs.writeFileSync(values.out, writeContainer(syntheticTensors(seed, mode as UnpoolMode)));
    } else {
      if (!values.checkpoint?.length) {
        console.error("error: give at least one --checkpoint, or use --synthetic");
        return 2;
      }
      exportFromCheckpoints({
        checkpointPaths: values.checkpoint,
        mode: mode as UnpoolMode,
        outPath: values.out,
        nameMapPath: values["name-map"],
      });
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  console.log(`wrote ${values.out}`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(run(process.argv.slice(2)));
}
