/**
 * Checkpoint-key to canonical-name mapping.
 *
 * The map is data, not code, so drift in released checkpoint naming is
 * absorbed by editing JSON: each entry gives the source key, the canonical
 * target, and the source weight layout ("oikk" = already (out,in,kh,kw);
 * "kkio" = (kh,kw,in,out), transposed on export). Canonical keys already
 * present in a checkpoint pass through without an entry.
 */

import * as fs from "node:fs";

export type Layout = "oikk" | "kkio";

export interface NameMapEntry {
  source: string;
  target: string;
  layout?: Layout;
}

export interface NameMap {
  entries: NameMapEntry[];
}

/** torchvision-style VGG-19 `features.N` keys for the encoder half. */
export const DEFAULT_NAME_MAP: NameMap = {
  entries: [
    ["features.0", "conv1_1"],
    ["features.2", "conv1_2"],
    ["features.5", "conv2_1"],
    ["features.7", "conv2_2"],
    ["features.10", "conv3_1"],
    ["features.12", "conv3_2"],
    ["features.14", "conv3_3"],
    ["features.16", "conv3_4"],
    ["features.19", "conv4_1"],
  ].flatMap(([source, target]) => [
    { source: `${source}.weight`, target: `encoder.${target}.weight`, layout: "oikk" as Layout },
    { source: `${source}.bias`, target: `encoder.${target}.bias` },
  ]),
};

export function loadNameMap(path: string): NameMap {
  const parsed = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!Array.isArray(parsed.entries)) {
    throw new Error(`${path}: name map must have an "entries" array`);
  }
  for (const entry of parsed.entries) {
    if (typeof entry.source !== "string" || typeof entry.target !== "string") {
      throw new Error(`${path}: every entry needs string "source" and "target"`);
    }
    if (entry.layout && entry.layout !== "oikk" && entry.layout !== "kkio") {
      throw new Error(`${path}: unknown layout ${entry.layout}`);
    }
  }
  return parsed as NameMap;
}
