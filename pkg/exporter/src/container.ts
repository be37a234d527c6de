/**
 * Writer (and self-check reader) for the wct2 weight container.
 *
 * Layout, all integers little-endian:
 *   magic "WCT2WTS\0" | u32 version=1 | u32 tensor count |
 *   per tensor: u16 name length, UTF-8 name, u8 dtype (0=f32), u8 ndim,
 *               u32 dims[ndim], raw float32 payload |
 *   u32 CRC32 over everything after the magic.
 *
 * Tensors are written in lexicographic name order so identical inputs always
 * produce identical bytes.
 */

import { Buffer } from "node:buffer";
import * as os from "node:os";

export const MAGIC = Buffer.from("WCT2WTS\0", "latin1");
export const VERSION = 1;
export const DTYPE_F32 = 0;

export interface NamedTensor {
  name: string;
  dims: number[];
  data: Float32Array;
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (let i = 0; i < data.length; i++) {
    crc = CRC_TABLE[(crc ^ data[i]) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function elementCount(dims: number[]): number {
  return dims.reduce((a, b) => a * b, 1);
}

function float32Bytes(data: Float32Array): Buffer {
  // Payloads are little-endian by contract; big-endian hosts would need a
  // byte swap here.
  if (os.endianness() !== "LE") {
    throw new Error("container writing requires a little-endian host");
  }
  return Buffer.from(data.buffer, data.byteOffset, data.byteLength);
}

export function writeContainer(tensors: NamedTensor[]): Buffer {
  const seen = new Set<string>();
  for (const tensor of tensors) {
    if (seen.has(tensor.name)) {
      throw new Error(`duplicate tensor name ${tensor.name}`);
    }
    seen.add(tensor.name);
    if (elementCount(tensor.dims) !== tensor.data.length) {
      throw new Error(
        `tensor ${tensor.name}: dims [${tensor.dims}] declare ${elementCount(tensor.dims)} elements ` +
          `but payload has ${tensor.data.length}`,
      );
    }
  }
  const ordered = [...tensors].sort((a, b) => (a.name < b.name ? -1 : a.name > b.name ? 1 : 0));

  const parts: Buffer[] = [];
  const header = Buffer.alloc(8);
  header.writeUInt32LE(VERSION, 0);
  header.writeUInt32LE(ordered.length, 4);
  parts.push(header);
  for (const tensor of ordered) {
    const nameBytes = Buffer.from(tensor.name, "utf-8");
    const meta = Buffer.alloc(2 + nameBytes.length + 2 + 4 * tensor.dims.length);
    let offset = 0;
    meta.writeUInt16LE(nameBytes.length, offset);
    offset += 2;
    nameBytes.copy(meta, offset);
    offset += nameBytes.length;
    meta.writeUInt8(DTYPE_F32, offset++);
    meta.writeUInt8(tensor.dims.length, offset++);
    for (const dim of tensor.dims) {
      meta.writeUInt32LE(dim, offset);
      offset += 4;
    }
    parts.push(meta, float32Bytes(tensor.data));
  }
  const body = Buffer.concat(parts);
  const trailer = Buffer.alloc(4);
  trailer.writeUInt32LE(crc32(body), 0);
  return Buffer.concat([MAGIC, body, trailer]);
}

/** Parses a container back into tensors, validating structure and checksum. */
export function readContainer(blob: Buffer): NamedTensor[] {
  if (blob.length < MAGIC.length + 12 || !blob.subarray(0, MAGIC.length).equals(MAGIC)) {
    throw new Error("not a weight container (bad magic or too short)");
  }
  const body = blob.subarray(MAGIC.length, blob.length - 4);
  const storedCrc = blob.readUInt32LE(blob.length - 4);
  let offset = 0;
  const take = (count: number, what: string): Buffer => {
    if (offset + count > body.length) {
      throw new Error(`truncated while reading ${what}`);
    }
    const chunk = body.subarray(offset, offset + count);
    offset += count;
    return chunk;
  };
  const version = take(4, "version").readUInt32LE(0);
  if (version !== VERSION) {
    throw new Error(`unsupported container version ${version}`);
  }
  const count = take(4, "tensor count").readUInt32LE(0);
  const tensors: NamedTensor[] = [];
  for (let i = 0; i < count; i++) {
    const nameLength = take(2, `name length of tensor ${i}`).readUInt16LE(0);
    const name = take(nameLength, `name of tensor ${i}`).toString("utf-8");
    const dtype = take(1, `dtype of ${name}`).readUInt8(0);
    if (dtype !== DTYPE_F32) {
      throw new Error(`tensor ${name}: unsupported dtype tag ${dtype}`);
    }
    const ndim = take(1, `ndim of ${name}`).readUInt8(0);
    const dims: number[] = [];
    for (let d = 0; d < ndim; d++) {
      dims.push(take(4, `dims of ${name}`).readUInt32LE(0));
    }
    const payload = take(4 * elementCount(dims), `payload of ${name}`);
    const data = new Float32Array(elementCount(dims));
    for (let e = 0; e < data.length; e++) {
      data[e] = payload.readFloatLE(4 * e);
    }
    tensors.push({ name, dims, data });
  }
  if (offset !== body.length) {
    throw new Error("unexpected trailing bytes before checksum");
  }
  const actual = crc32(body);
  if (actual !== storedCrc) {
    throw new Error(`checksum mismatch (stored ${storedCrc.toString(16)}, computed ${actual.toString(16)})`);
  }
  return tensors;
}
