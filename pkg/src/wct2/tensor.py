"""Dense CHW tensors and the minimal inference kernels (conv, relu, padding).

Everything here is pure: inputs are never mutated and FeatureMap payloads are
marked read-only, so values can be shared freely across threads. Convolution
accumulates in float64 and stores float32 to bound error growth through deep
stacks of layers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


class PaddingMode(enum.Enum):
    ZERO = "zero"
    REFLECT = "reflect"


class FeatureMap:
    """A (channels, height, width) float32 tensor in row-major CHW layout.

    All dimensions are positive and every value is finite; construction
    enforces both. The payload is read-only.
    """

    __slots__ = ("data",)

    def __init__(self, data) -> None:
        arr = np.ascontiguousarray(data, dtype=np.float32)
        if arr.ndim != 3:
            raise ContractViolation(f"feature map must be 3-d (C,H,W), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ContractViolation(f"feature map dimensions must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractViolation("feature map contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FeatureMap is immutable")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"FeatureMap(channels={self.channels}, height={self.height}, width={self.width})"


@dataclass(frozen=True)
class ConvLayer:
    """A 3x3 convolution layer: weight (out, in, 3, 3) and bias (out,)."""

    weight: np.ndarray
    bias: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if w.ndim != 4 or w.shape[2:] != (3, 3):
            raise ContractViolation(
                f"conv weight must be (out, in, 3, 3), got {w.shape}" + (f" for {self.name}" if self.name else "")
            )
        if b.shape != (w.shape[0],):
            raise ContractViolation(f"conv bias must be ({w.shape[0]},), got {b.shape}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def parameter_count(self) -> int:
        return self.weight.size + self.bias.size


def reflect_pad(x: FeatureMap, top: int, bottom: int, left: int, right: int) -> FeatureMap:
    """Mirror-extend the borders of ``x`` (edge pixel not duplicated)."""
    for amount, dim, label in (
        (top, x.height, "top"),
        (bottom, x.height, "bottom"),
        (left, x.width, "left"),
        (right, x.width, "right"),
    ):
        if amount < 0:
            raise ContractViolation(f"negative {label} padding")
        if amount >= dim:
            raise ContractViolation(f"{label} padding {amount} must be smaller than dimension {dim}")
    if top == bottom == left == right == 0:
        return x
    padded = np.pad(x.data, ((0, 0), (top, bottom), (left, right)), mode="reflect")
    return FeatureMap(padded)


def _pad_array(data: np.ndarray, mode: PaddingMode) -> np.ndarray:
    if mode is PaddingMode.REFLECT:
        if data.shape[1] < 2 or data.shape[2] < 2:
            raise ContractViolation("reflection padding needs height and width >= 2")
        return np.pad(data, ((0, 0), (1, 1), (1, 1)), mode="reflect")
    return np.pad(data, ((0, 0), (1, 1), (1, 1)), mode="constant")


def conv2d(x: FeatureMap, layer: ConvLayer, padding: PaddingMode = PaddingMode.REFLECT) -> FeatureMap:
    """Cross-correlate ``x`` with a 3x3 layer, spatial size preserved (pad 1).

    Output value at each site is the direct dot product of the kernel with the
    padded input window, plus the bias. Accumulation runs in float64; the
    result is stored as float32.
    """
    if x.channels != layer.in_channels:
        raise ContractViolation(
            f"input has {x.channels} channels but layer"
            + (f" {layer.name}" if layer.name else "")
            + f" expects {layer.in_channels}"
        )
    c, h, w = x.shape
    padded = _pad_array(x.data, padding).astype(np.float64)
    weight2d = layer.weight.astype(np.float64).reshape(layer.out_channels, c * 9)
    bias = layer.bias.astype(np.float64)[:, None]
    out = np.empty((layer.out_channels, h * w), dtype=np.float64)
    # im2col + one GEMM per block of output rows. Each output site is a single
    # dot product, so the block size never changes the result; it only bounds
    # the size of the unrolled window matrix (~128 MB).
    block_rows = max(1, min(h, (128 * 2**20) // (c * 9 * 8 * w)))
    for r0 in range(0, h, block_rows):
        r1 = min(r0 + block_rows, h)
        count = (r1 - r0) * w
        slab = np.empty((c, 9, count), dtype=np.float64)
        for ky in range(3):
            for kx in range(3):
                slab[:, ky * 3 + kx, :] = padded[:, r0 + ky : r1 + ky, kx : kx + w].reshape(c, count)
        out[:, r0 * w : r1 * w] = weight2d @ slab.reshape(c * 9, count)
    out += bias
    return FeatureMap(out.reshape(layer.out_channels, h, w).astype(np.float32))


def relu(x: FeatureMap) -> FeatureMap:
    """Elementwise max(x, 0)."""
    return FeatureMap(np.maximum(x.data, np.float32(0.0)))


def pad_to_multiple(x: FeatureMap, multiple: int = 8) -> tuple[FeatureMap, int, int]:
    """Reflect-pad bottom/right so both spatial dims divide ``multiple``.

    Returns (padded, pad_bottom, pad_right); cropping the pads recovers the
    input exactly.
    """
    pad_bottom = (-x.height) % multiple
    pad_right = (-x.width) % multiple
    return reflect_pad(x, 0, pad_bottom, 0, pad_right), pad_bottom, pad_right
