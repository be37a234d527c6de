"""Quantitative evaluation: edge-map SSIM and feature-covariance style loss.

Edge responses use the Sobel gradient magnitude of the luminance channel
rather than a trained edge detector, so the metric is deterministic and
dependency-free. Absolute values are therefore not comparable to results
computed with a learned detector; only orderings between runs of this
package are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .network import ENCODER_TAPS, Model, encode
from .tensor import ConvLayer, FeatureMap, conv2d, pad_to_multiple

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

# Rec. 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]], dtype=np.float32)
_SOBEL_Y = _SOBEL_X.T.copy()


@dataclass(frozen=True)
class MetricReport:
    """ssim over edge maps, total style loss, and its per-layer breakdown."""

    ssim_edges: float
    style_loss: float
    style_loss_layers: dict[str, float] = field(default_factory=dict)

    def to_kv_lines(self) -> list[str]:
        lines = [
            f"ssim_edges={self.ssim_edges:.9f}",
            f"style_loss={self.style_loss:.9e}",
        ]
        for name, value in self.style_loss_layers.items():
            lines.append(f"style_loss.{name}={value:.9e}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_kv_lines())


def edge_response(image: FeatureMap) -> FeatureMap:
    """Sobel gradient magnitude of the luminance channel, scaled to [0, 1].

    The map is normalized by its own peak; a constant image yields all zeros.
    """
    if image.channels == 3:
        luma = np.tensordot(_LUMA, image.data.astype(np.float64), axes=([0], [0]))
    elif image.channels == 1:
        luma = image.data[0].astype(np.float64)
    else:
        raise ContractViolation(f"edge_response expects 1 or 3 channels, got {image.channels}")
    luma_fm = FeatureMap(luma[None].astype(np.float32))
    gx = conv2d(luma_fm, ConvLayer(weight=_SOBEL_X[None, None], bias=np.zeros(1, dtype=np.float32)))
    gy = conv2d(luma_fm, ConvLayer(weight=_SOBEL_Y[None, None], bias=np.zeros(1, dtype=np.float32)))
    magnitude = np.sqrt(gx.data.astype(np.float64) ** 2 + gy.data.astype(np.float64) ** 2)
    peak = magnitude.max()
    if peak > 0:
        magnitude /= peak
    return FeatureMap(magnitude.astype(np.float32))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    window = np.outer(g, g)
    return window / window.sum()


def _windowed_mean(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    views = np.lib.stride_tricks.sliding_window_view(plane, window.shape)
    return np.tensordot(views, window, axes=([2, 3], [0, 1]))


def ssim(a: FeatureMap, b: FeatureMap) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), unit dynamic range."""
    for fm, label in ((a, "first"), (b, "second")):
        if fm.channels != 1:
            raise ContractViolation(f"ssim expects single-channel maps, {label} input has {fm.channels}")
    if a.shape != b.shape:
        raise ContractViolation(f"ssim inputs must share dimensions, got {a.shape} vs {b.shape}")
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ContractViolation(f"ssim needs maps at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.height}x{a.width}")
    eps = 1e-6
    for fm, label in ((a, "first"), (b, "second")):
        lo, hi = float(fm.data.min()), float(fm.data.max())
        if lo < -eps or hi > 1.0 + eps:
            raise ContractViolation(f"ssim {label} input values must lie in [0, 1], got [{lo}, {hi}]")

    window = _gaussian_window()
    x = a.data[0].astype(np.float64)
    y = b.data[0].astype(np.float64)
    mu_x = _windowed_mean(x, window)
    mu_y = _windowed_mean(y, window)
    xx = _windowed_mean(x * x, window) - mu_x * mu_x
    yy = _windowed_mean(y * y, window) - mu_y * mu_y
    xy = _windowed_mean(x * y, window) - mu_x * mu_y
    numerator = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * xy + SSIM_C2)
    denominator = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (xx + yy + SSIM_C2)
    return float(np.mean(numerator / denominator))


def _gram(features: FeatureMap) -> np.ndarray:
    """Covariance-style Gram: centered features times transpose over pixel count."""
    cols = features.data.reshape(features.channels, -1).astype(np.float64)
    centered = cols - cols.mean(axis=1, keepdims=True)
    return centered @ centered.T / cols.shape[1]


def style_loss(style_image: FeatureMap, output_image: FeatureMap, model: Model) -> tuple[float, dict[str, float]]:
    """Sum over encoder taps of the squared Frobenius Gram difference over C^2."""
    taps_style = encode(model, style_image).taps
    taps_output = encode(model, output_image).taps
    breakdown: dict[str, float] = {}
    for name in ENCODER_TAPS:
        gram_s = _gram(taps_style[name])
        gram_o = _gram(taps_output[name])
        c = gram_s.shape[0]
        breakdown[name] = float(np.sum((gram_s - gram_o) ** 2) / (c * c))
    return sum(breakdown.values()), breakdown


def psnr(a: FeatureMap, b: FeatureMap, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; infinity for identical inputs."""
    if a.shape != b.shape:
        raise ContractViolation(f"psnr inputs must share dimensions, got {a.shape} vs {b.shape}")
    mse = float(np.mean((a.data.astype(np.float64) - b.data.astype(np.float64)) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def compute_report(content: FeatureMap, style: FeatureMap, output: FeatureMap, model: Model) -> MetricReport:
    """Edge-map SSIM against the content plus style loss against the style.

    Inputs may have arbitrary sizes (content and output must match); both
    encoder passes reflect-pad to a multiple of 8 internally.
    """
    ssim_edges = ssim(edge_response(content), edge_response(output))
    padded_style, _, _ = pad_to_multiple(style)
    padded_output, _, _ = pad_to_multiple(output)
    total, breakdown = style_loss(padded_style, padded_output, model)
    return MetricReport(ssim_edges=ssim_edges, style_loss=total, style_loss_layers=breakdown)
