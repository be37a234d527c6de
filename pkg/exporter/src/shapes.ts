/**
 * Canonical tensor plan for the encoder/decoder, mirroring the loader's
 * expectations: conv weights are (out, in, 3, 3), biases (out,). Concat-mode
 * decoders widen the conv after each unpool to 5x input channels.
 */

export type UnpoolMode = "sum" | "concat";

export interface TensorSpec {
  name: string;
  shape: number[];
}

const ENCODER_CONVS: Array<[string, number, number]> = [
  ["conv1_1", 3, 64],
  ["conv1_2", 64, 64],
  ["conv2_1", 64, 128],
  ["conv2_2", 128, 128],
  ["conv3_1", 128, 256],
  ["conv3_2", 256, 256],
  ["conv3_3", 256, 256],
  ["conv3_4", 256, 256],
  ["conv4_1", 256, 512],
];

function decoderConvs(mode: UnpoolMode): Array<[string, number, number]> {
  const mult = mode === "concat" ? 5 : 1;
  return [
    ["conv4_1", 512, 256],
    ["conv3_4", 256 * mult, 256],
    ["conv3_3", 256, 256],
    ["conv3_2", 256, 256],
    ["conv3_1", 256, 128],
    ["conv2_2", 128 * mult, 128],
    ["conv2_1", 128, 64],
    ["conv1_2", 64 * mult, 64],
    ["conv1_1", 64, 3],
  ];
}

export function requiredTensors(mode: UnpoolMode): TensorSpec[] {
  const specs: TensorSpec[] = [];
  for (const [name, cin, cout] of ENCODER_CONVS) {
    specs.push({ name: `encoder.${name}.weight`, shape: [cout, cin, 3, 3] });
    specs.push({ name: `encoder.${name}.bias`, shape: [cout] });
  }
  for (const [name, cin, cout] of decoderConvs(mode)) {
    specs.push({ name: `decoder.${name}.weight`, shape: [cout, cin, 3, 3] });
    specs.push({ name: `decoder.${name}.bias`, shape: [cout] });
  }
  return specs;
}
