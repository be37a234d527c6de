/**
 * Export orchestration: gather tensors from checkpoints via the name map,
 * validate shapes against the canonical plan, and emit the container.
 * Values are copied bit for bit; only naming and axis order change.
 */

import * as fs from "node:fs";

import { writeContainer, type NamedTensor } from "./container.js";
import { readSafetensors, type Checkpoint } from "./checkpoint.js";
import { DEFAULT_NAME_MAP, loadNameMap, type NameMap } from "./namemap.js";
import { requiredTensors, type UnpoolMode } from "./shapes.js";

function shapesEqual(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** (kh, kw, in, out) -> (out, in, kh, kw), element-exact. */
function transposeKkio(data: Float32Array, shape: number[]): { data: Float32Array; shape: number[] } {
  const [kh, kw, cin, cout] = shape;
  const out = new Float32Array(data.length);
  for (let y = 0; y < kh; y++) {
    for (let x = 0; x < kw; x++) {
      for (let i = 0; i < cin; i++) {
        for (let o = 0; o < cout; o++) {
          out[((o * cin + i) * kh + y) * kw + x] = data[((y * kw + x) * cin + i) * cout + o];
        }
      }
    }
  }
  return { data: out, shape: [cout, cin, kh, kw] };
}

export interface ExportOptions {
  checkpointPaths: string[];
  mode: UnpoolMode;
  outPath: string;
  nameMapPath?: string;
}

export function exportFromCheckpoints(options: ExportOptions): void {
  const nameMap: NameMap = options.nameMapPath ? loadNameMap(options.nameMapPath) : DEFAULT_NAME_MAP;
  const merged: Checkpoint = new Map();
  for (const path of options.checkpointPaths) {
    for (const [key, tensor] of readSafetensors(path)) {
      merged.set(key, tensor);
    }
  }
  const bySource = new Map(nameMap.entries.map((entry) => [entry.target, entry]));

  const tensors: NamedTensor[] = [];
  const missing: string[] = [];
  const shapeErrors: string[] = [];
  for (const spec of requiredTensors(options.mode)) {
    const entry = bySource.get(spec.name);
    const sourceKey = entry && merged.has(entry.source) ? entry.source : spec.name;
    const source = merged.get(sourceKey);
    if (!source) {
      missing.push(spec.name);
      continue;
    }
    let data = source.data;
    let shape = source.shape;
    if (entry?.layout === "kkio" && shape.length === 4) {
      ({ data, shape } = transposeKkio(data, shape));
    }
    if (!shapesEqual(shape, spec.shape)) {
      shapeErrors.push(`${spec.name}: checkpoint shape [${shape}] vs required [${spec.shape}]`);
      continue;
    }
    tensors.push({ name: spec.name, dims: spec.shape, data });
  }
  if (missing.length) {
    throw new Error(`missing tensors (checkpoint keys not found):\n  ${missing.join("\n  ")}`);
  }
  if (shapeErrors.length) {
    throw new Error(`shape mismatches:\n  ${shapeErrors.join("\n  ")}`);
  }
  fs.writeFileSync(options.outPath, writeContainer(tensors));
}
