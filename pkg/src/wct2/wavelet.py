"""Haar wavelet pooling/unpooling and the ablation pooling operators.

The Haar bank is built from the 1-d low/high pass pair L = [1, 1]/sqrt(2),
H = [-1, 1]/sqrt(2). Each 2x2 kernel is the outer product of two factors;
the first factor filters rows (the vertical axis) and the second filters
columns. With that convention the four kernels are named

    ll = outer(L, L)   smooth surface
    lh = outer(L, H)   responds to vertical edges
    hl = outer(H, L)   responds to horizontal edges
    hh = outer(H, H)   responds to diagonals

The flattened kernels form an orthonormal basis of R^(2x2), so pooling
followed by unpooling reconstructs the input exactly (a tight frame: energy
is conserved and noise is not amplified). Split pooling uses the four
one-hot kernels instead, which select the polyphase components; it is also
an exact permutation. Average and max pooling are the lossy baselines.

Odd spatial sizes are the caller's problem by design: padding policy lives
in the image pipeline, keeping the reconstruction contract here exact. All
operations are pure functions of read-only inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .tensor import FeatureMap

HAAR_LOW = np.array([1.0, 1.0]) / np.sqrt(2.0)
HAAR_HIGH = np.array([-1.0, 1.0]) / np.sqrt(2.0)

KERNEL_ORDER = ("ll", "lh", "hl", "hh")


def haar_kernels() -> np.ndarray:
    """The four 2x2 Haar kernels, stacked (4, 2, 2) in ll/lh/hl/hh order."""
    return np.stack(
        [
            np.outer(HAAR_LOW, HAAR_LOW),
            np.outer(HAAR_LOW, HAAR_HIGH),
            np.outer(HAAR_HIGH, HAAR_LOW),
            np.outer(HAAR_HIGH, HAAR_HIGH),
        ]
    )


def split_kernels() -> np.ndarray:
    """One-hot 2x2 kernels selecting top-left/top-right/bottom-left/bottom-right."""
    kernels = np.zeros((4, 2, 2))
    kernels[0, 0, 0] = 1.0
    kernels[1, 0, 1] = 1.0
    kernels[2, 1, 0] = 1.0
    kernels[3, 1, 1] = 1.0
    return kernels


# float32 kernels make the Haar entries exactly +-0.5, so pooling arithmetic
# rounds at most twice per output value.
_HAAR_F32 = haar_kernels().astype(np.float32)
_SPLIT_F32 = split_kernels().astype(np.float32)


@dataclass(frozen=True)
class WaveletSubbands:
    """The four half-resolution outputs of one 2x2 stride-2 pooling step.

    For split pooling the same container carries the polyphase components in
    ll/lh/hl/hh order (top-left, top-right, bottom-left, bottom-right).
    """

    ll: FeatureMap
    lh: FeatureMap
    hl: FeatureMap
    hh: FeatureMap

    def __post_init__(self):
        shapes = {self.ll.shape, self.lh.shape, self.hl.shape, self.hh.shape}
        if len(shapes) != 1:
            raise ContractViolation(f"subbands must share one shape, got {sorted(shapes)}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.ll.shape

    def as_tuple(self) -> tuple[FeatureMap, FeatureMap, FeatureMap, FeatureMap]:
        return (self.ll, self.lh, self.hl, self.hh)


def _require_even(x: FeatureMap, op: str) -> None:
    if x.height % 2 or x.width % 2:
        raise ContractViolation(f"{op} requires even height and width, got {x.height}x{x.width}")


def _quadrants(data: np.ndarray):
    """The four stride-2 phases: (top-left, top-right, bottom-left, bottom-right)."""
    return (
        data[:, 0::2, 0::2],
        data[:, 0::2, 1::2],
        data[:, 1::2, 0::2],
        data[:, 1::2, 1::2],
    )


def pool_with_kernels(data: np.ndarray, kernels: np.ndarray) -> list[np.ndarray]:
    """Stride-2 valid cross-correlation of each channel with each 2x2 kernel.

    Exposed (rather than private) so the verification suite can run the same
    code path with deliberately perturbed kernels.
    """
    a, b, c, d = _quadrants(data)
    return [k[0, 0] * a + k[0, 1] * b + k[1, 0] * c + k[1, 1] * d for k in kernels]


def unpool_with_kernels(bands: list[np.ndarray], kernels: np.ndarray) -> np.ndarray:
    """Sum of per-band stride-2 transposed convolutions with the 2x2 kernels."""
    ch, h, w = bands[0].shape
    out = np.zeros((ch, 2 * h, 2 * w), dtype=np.result_type(*[b.dtype for b in bands], kernels.dtype))
    for band, k in zip(bands, kernels):
        out[:, 0::2, 0::2] += k[0, 0] * band
        out[:, 0::2, 1::2] += k[0, 1] * band
        out[:, 1::2, 0::2] += k[1, 0] * band
        out[:, 1::2, 1::2] += k[1, 1] * band
    return out


def upsample_with_kernel(band: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Stride-2 transposed convolution of one band with one 2x2 kernel."""
    return unpool_with_kernels([band], kernel[None])


def haar_pool(x: FeatureMap) -> WaveletSubbands:
    """Decompose ``x`` into four half-resolution subbands."""
    _require_even(x, "haar_pool")
    ll, lh, hl, hh = pool_with_kernels(x.data, _HAAR_F32)
    return WaveletSubbands(FeatureMap(ll), FeatureMap(lh), FeatureMap(hl), FeatureMap(hh))


def haar_unpool(subbands: WaveletSubbands) -> FeatureMap:
    """Exact left-inverse of haar_pool: per-band transposed conv, then sum."""
    bands = [fm.data for fm in subbands.as_tuple()]
    return FeatureMap(unpool_with_kernels(bands, _HAAR_F32))


def split_pool(x: FeatureMap) -> WaveletSubbands:
    """The four stride-2 polyphase components (a lossless permutation)."""
    _require_even(x, "split_pool")
    parts = pool_with_kernels(x.data, _SPLIT_F32)
    return WaveletSubbands(*(FeatureMap(p) for p in parts))


def split_unpool(subbands: WaveletSubbands) -> FeatureMap:
    """Re-interleave polyphase components; exact inverse of split_pool."""
    bands = [fm.data for fm in subbands.as_tuple()]
    return FeatureMap(unpool_with_kernels(bands, _SPLIT_F32))


def average_pool(x: FeatureMap) -> FeatureMap:
    """2x2 stride-2 mean per channel. Equals haar_pool(x).ll / 2."""
    _require_even(x, "average_pool")
    a, b, c, d = _quadrants(x.data)
    return FeatureMap((a + b + c + d) * np.float32(0.25))


def average_unpool(x: FeatureMap) -> FeatureMap:
    """Transposed convolution with the all-ones 2x2 kernel (nearest upsample).

    Dual of average_pool that preserves constants; the pair is lossy on
    everything else, which is the point of the ablation.
    """
    return FeatureMap(np.repeat(np.repeat(x.data, 2, axis=1), 2, axis=2))


def max_pool_with_mask(x: FeatureMap) -> tuple[FeatureMap, np.ndarray]:
    """2x2 stride-2 max per channel plus the per-window argmax index.

    The index is the position within the window in row-major order
    (0=top-left .. 3=bottom-right); ties break to the first index.
    """
    _require_even(x, "max_pool_with_mask")
    windows = np.stack(_quadrants(x.data), axis=-1)
    mask = np.argmax(windows, axis=-1).astype(np.uint8)
    values = np.take_along_axis(windows, mask[..., None].astype(np.intp), axis=-1)[..., 0]
    return FeatureMap(values), mask


def max_unpool(pooled: FeatureMap, mask: np.ndarray) -> FeatureMap:
    """Scatter each pooled value back to its recorded argmax position."""
    if mask.shape != pooled.shape:
        raise ContractViolation(f"mask shape {mask.shape} must match pooled shape {pooled.shape}")
    ch, h, w = pooled.shape
    windows = np.zeros((ch, h, w, 4), dtype=np.float32)
    np.put_along_axis(windows, mask[..., None].astype(np.intp), pooled.data[..., None], axis=-1)
    out = np.zeros((ch, 2 * h, 2 * w), dtype=np.float32)
    out[:, 0::2, 0::2] = windows[..., 0]
    out[:, 0::2, 1::2] = windows[..., 1]
    out[:, 1::2, 0::2] = windows[..., 2]
    out[:, 1::2, 1::2] = windows[..., 3]
    return FeatureMap(out)
