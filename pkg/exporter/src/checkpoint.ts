/**
 * Minimal safetensors reader: u64 little-endian header length, JSON header
 * mapping tensor name to {dtype, shape, data_offsets}, then the raw buffer.
 * Only F32 tensors are accepted; values are never transformed.
 */

import * as fs from "node:fs";

export interface CheckpointTensor {
  shape: number[];
  data: Float32Array;
}

export type Checkpoint = Map<string, CheckpointTensor>;

export function readSafetensors(path: string): Checkpoint {
  const blob = fs.readFileSync(path);
  if (blob.length < 8) {
    throw new Error(`${path}: too short to be a safetensors file`);
  }
  const headerLength = Number(blob.readBigUInt64LE(0));
  if (8 + headerLength > blob.length) {
    throw new Error(`${path}: header length ${headerLength} exceeds file size`);
  }
  const header = JSON.parse(blob.subarray(8, 8 + headerLength).toString("utf-8"));
  const dataStart = 8 + headerLength;
  const tensors: Checkpoint = new Map();
  for (const [name, info] of Object.entries<any>(header)) {
    if (name === "__metadata__") {
      continue;
    }
    if (info.dtype !== "F32") {
      throw new Error(`${path}: tensor ${name} has dtype ${info.dtype}, only F32 is supported`);
    }
    const [begin, end] = info.data_offsets;
    const count = info.shape.reduce((a: number, b: number) => a * b, 1);
    if (end - begin !== 4 * count) {
      throw new Error(`${path}: tensor ${name} has inconsistent offsets`);
    }
    const payload = blob.subarray(dataStart + begin, dataStart + end);
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      data[i] = payload.readFloatLE(4 * i);
    }
    tensors.set(name, { shape: info.shape, data });
  }
  return tensors;
}
