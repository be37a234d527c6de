/**
 * Seeded synthetic containers: correctly shaped pseudo-random tensors so the
 * loader-side test suite never needs real checkpoints or network access.
 */

import type { NamedTensor } from "./container.js";
import { requiredTensors, type UnpoolMode } from "./shapes.js";

/** mulberry32: tiny deterministic PRNG, identical across platforms. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function syntheticTensors(seed: number, mode: UnpoolMode): NamedTensor[] {
  const next = mulberry32(seed);
  return requiredTensors(mode).map((spec) => {
    const count = spec.shape.reduce((a, b) => a * b, 1);
    const data = new Float32Array(count);
    const scale = 1.0 / Math.sqrt(count / spec.shape[0]);
    for (let i = 0; i < count; i++) {
      data[i] = Math.fround((next() - 0.5) * 2 * scale);
    }
    return { name: spec.name, dims: spec.shape, data };
  });
}
