"""Feature-space stylization: whitening/coloring transforms and AdaIN.

Whitening projects centered content features onto the eigenspace of their own
covariance and rescales each direction to unit variance; coloring applies the
inverse map built from the style covariance, re-correlating the features and
restoring the style mean. AdaIN is the cheap per-channel variant: an affine
restandardization to the style's channel-wise mean and standard deviation.

Both transforms optionally run per matched segmentation region. Tiny or flat
regions fall back to global statistics instead of failing, because sliver
segments are routine in real photographs. All statistics use float64
internally; covariance normalizes by (n - 1) and the per-channel standard
deviation for AdaIN by n. The constants cancel inside each round trip but are
fixed here so reported statistics are reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateRegionError
from .tensor import FeatureMap

EIGENVALUE_FLOOR = 1e-5
ADAIN_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class StyleStats:
    """Per-region feature statistics backing the transforms.

    eigenvalues are nonincreasing and all above EIGENVALUE_FLOOR; eigenvector
    columns are the matching orthonormal directions. channel_std carries the
    per-channel standard deviation used by AdaIN.
    """

    mean: np.ndarray
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    channel_std: np.ndarray
    pixel_count: int


@dataclass(frozen=True)
class SegmentationMap:
    """Integer label per pixel; labels are small nonnegative integers."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.labels)
        if arr.ndim != 2:
            raise ContractViolation(f"segmentation map must be 2-d, got ndim={arr.ndim}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ContractViolation(f"segmentation labels must be integers, got {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ContractViolation("segmentation labels must lie in [0, 255]")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def label_set(self) -> list[int]:
        return sorted(int(v) for v in np.unique(self.labels))


def _flat_selection(features: FeatureMap, mask: np.ndarray | None) -> np.ndarray | slice:
    """Boolean pixel selector flattened to length H*W (or slice(None) for all)."""
    if mask is None:
        return slice(None)
    mask = np.asarray(mask)
    if mask.shape != (features.height, features.width):
        raise ContractViolation(
            f"mask shape {mask.shape} must match feature spatial size ({features.height}, {features.width})"
        )
    return mask.reshape(-1).astype(bool)


def compute_stats(features: FeatureMap, mask: np.ndarray | None = None) -> StyleStats:
    """Mean, covariance, and floored eigendecomposition over the selected pixels."""
    sel = _flat_selection(features, mask)
    cols = features.data.reshape(features.channels, -1)[:, sel].astype(np.float64)
    n = cols.shape[1]
    if n < 2:
        raise DegenerateRegionError(f"need at least 2 pixels to compute statistics, got {n}")
    mean = cols.mean(axis=1)
    centered = cols - mean[:, None]
    cov = centered @ centered.T / (n - 1)
    cov = (cov + cov.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    keep = eigvals > EIGENVALUE_FLOOR
    channel_std = np.sqrt(np.mean(centered * centered, axis=1))
    return StyleStats(
        mean=mean,
        covariance=cov,
        eigenvalues=eigvals[keep],
        eigenvectors=eigvecs[:, keep],
        channel_std=channel_std,
        pixel_count=n,
    )


def _whiten_cols(cols: np.ndarray, stats: StyleStats) -> np.ndarray:
    if stats.eigenvalues.size == 0:
        raise DegenerateRegionError("no eigenvalues above the floor; region is effectively constant")
    e = stats.eigenvectors
    scaled = (e.T @ (cols - stats.mean[:, None])) / np.sqrt(stats.eigenvalues)[:, None]
    return e @ scaled


def _color_cols(cols: np.ndarray, stats: StyleStats) -> np.ndarray:
    if stats.eigenvalues.size == 0:
        raise DegenerateRegionError("no eigenvalues above the floor; region is effectively constant")
    e = stats.eigenvectors
    scaled = (e.T @ cols) * np.sqrt(stats.eigenvalues)[:, None]
    return e @ scaled + stats.mean[:, None]


def _apply_cols(features: FeatureMap, mask: np.ndarray | None, fn) -> FeatureMap:
    sel = _flat_selection(features, mask)
    flat = features.data.reshape(features.channels, -1)
    out = np.array(features.data)
    out.reshape(features.channels, -1)[:, sel] = fn(flat[:, sel].astype(np.float64)).astype(np.float32)
    return FeatureMap(out)


def whiten(features: FeatureMap, stats: StyleStats, mask: np.ndarray | None = None) -> FeatureMap:
    """Decorrelate the masked pixels to identity covariance on the retained eigenspace.

    Unmasked pixels pass through bit-identical. ``stats`` must come from the
    same features and mask.
    """
    return _apply_cols(features, mask, lambda cols: _whiten_cols(cols, stats))


def color(whitened: FeatureMap, style_stats: StyleStats, mask: np.ndarray | None = None) -> FeatureMap:
    """Re-correlate whitened pixels to the style covariance and mean."""
    return _apply_cols(whitened, mask, lambda cols: _color_cols(cols, style_stats))


def _matched_regions(content: FeatureMap, style: FeatureMap, masks):
    """Yield (label, content selector, style selector or None) per content label.

    A None style selector means the label is absent on the style side.
    Without masks, yields a single all-pixels pair.
    """
    if masks is None:
        yield None, slice(None), slice(None)
        return
    seg_c, seg_s = masks
    if (seg_c.height, seg_c.width) != (content.height, content.width):
        raise ContractViolation(
            f"content segmentation {seg_c.labels.shape} does not match features "
            f"({content.height}, {content.width})"
        )
    if (seg_s.height, seg_s.width) != (style.height, style.width):
        raise ContractViolation(
            f"style segmentation {seg_s.labels.shape} does not match features "
            f"({style.height}, {style.width})"
        )
    flat_c = seg_c.labels.reshape(-1)
    flat_s = seg_s.labels.reshape(-1)
    style_labels = set(np.unique(flat_s).tolist())
    for label in np.unique(flat_c).tolist():
        sel_c = flat_c == label
        sel_s = flat_s == label if label in style_labels else None
        yield int(label), sel_c, sel_s


def _region_size(sel, total: int) -> int:
    return total if isinstance(sel, slice) else int(np.count_nonzero(sel))


def _blend(out_flat: np.ndarray, orig_flat: np.ndarray, sel, transformed: np.ndarray, alpha: float) -> None:
    if alpha >= 1.0:
        out_flat[:, sel] = transformed.astype(np.float32)
    else:
        mixed = alpha * transformed + (1.0 - alpha) * orig_flat[:, sel].astype(np.float64)
        out_flat[:, sel] = mixed.astype(np.float32)


def _check_pair(content: FeatureMap, style: FeatureMap, alpha: float) -> None:
    if content.channels != style.channels:
        raise ContractViolation(f"channel mismatch: content {content.channels} vs style {style.channels}")
    if not 0.0 <= alpha <= 1.0:
        raise ContractViolation(f"alpha must lie in [0, 1], got {alpha}")


def wct(content: FeatureMap, style: FeatureMap, masks=None, alpha: float = 1.0) -> FeatureMap:
    """Whitening-and-coloring transfer, optionally per matched segmentation region.

    Each content region is whitened with its own statistics and colored with
    the statistics of the style region carrying the same label. Regions too
    small to support the estimate (fewer than 2 pixels, or fewer pixels than
    channels) borrow the global statistics of their side; a label missing on
    the style side does the same and emits a warning. Output is the alpha
    blend with the untransformed content.
    """
    _check_pair(content, style, alpha)
    if alpha == 0.0:
        return content
    c = content.channels
    flat_content = content.data.reshape(c, -1)
    flat_style = style.data.reshape(c, -1)
    out = np.array(content.data)
    out_flat = out.reshape(c, -1)

    global_content: StyleStats | None = None
    global_style: StyleStats | None = None

    def content_stats(sel) -> StyleStats:
        nonlocal global_content
        n = _region_size(sel, flat_content.shape[1])
        if n >= 2 and n >= c:
            stats = compute_stats(content, _unflatten(sel, content))
            if stats.eigenvalues.size:
                return stats
        if global_content is None:
            global_content = compute_stats(content)
        return global_content

    def style_stats_for(label, sel) -> StyleStats:
        nonlocal global_style
        if sel is None:
            warnings.warn(
                f"segmentation label {label} present in content but absent in style; "
                "using global style statistics",
                stacklevel=3,
            )
        else:
            n = _region_size(sel, flat_style.shape[1])
            if n >= 2 and n >= c:
                stats = compute_stats(style, _unflatten(sel, style))
                if stats.eigenvalues.size:
                    return stats
        if global_style is None:
            global_style = compute_stats(style)
        return global_style

    for label, sel_c, sel_s in _matched_regions(content, style, masks):
        stats_c = content_stats(sel_c)
        stats_s = style_stats_for(label, sel_s)
        cols = flat_content[:, sel_c].astype(np.float64)
        transformed = _color_cols(_whiten_cols(cols, stats_c), stats_s)
        _blend(out_flat, flat_content, sel_c, transformed, alpha)
    return FeatureMap(out)


def adain(content: FeatureMap, style: FeatureMap, masks=None, alpha: float = 1.0) -> FeatureMap:
    """Per-channel restandardization of content to the style's mean/std.

    Same region matching, fallback, and blending rules as wct; the standard
    deviation divisor is floored at ADAIN_STD_FLOOR.
    """
    _check_pair(content, style, alpha)
    if alpha == 0.0:
        return content
    c = content.channels
    flat_content = content.data.reshape(c, -1)
    flat_style = style.data.reshape(c, -1)
    out = np.array(content.data)
    out_flat = out.reshape(c, -1)

    def moments(flat: np.ndarray, sel) -> tuple[np.ndarray, np.ndarray]:
        cols = flat[:, sel].astype(np.float64)
        if cols.shape[1] < 2:
            cols = flat.astype(np.float64)
        return cols.mean(axis=1), cols.std(axis=1)

    for label, sel_c, sel_s in _matched_regions(content, style, masks):
        if sel_s is None:
            warnings.warn(
                f"segmentation label {label} present in content but absent in style; "
                "using global style statistics",
                stacklevel=2,
            )
            sel_s_eff: np.ndarray | slice = slice(None)
        else:
            sel_s_eff = sel_s
        mu_c, sigma_c = moments(flat_content, sel_c)
        mu_s, sigma_s = moments(flat_style, sel_s_eff)
        cols = flat_content[:, sel_c].astype(np.float64)
        scale = sigma_s / np.maximum(sigma_c, ADAIN_STD_FLOOR)
        transformed = (cols - mu_c[:, None]) * scale[:, None] + mu_s[:, None]
        _blend(out_flat, flat_content, sel_c, transformed, alpha)
    return FeatureMap(out)


def _unflatten(sel, features: FeatureMap) -> np.ndarray | None:
    """Convert a flat pixel selector back to an (H, W) mask for compute_stats."""
    if isinstance(sel, slice):
        return None
    return sel.reshape(features.height, features.width)


def apply_transform(
    kind: str,
    content: FeatureMap,
    style: FeatureMap,
    masks=None,
    alpha: float = 1.0,
) -> FeatureMap:
    """Dispatch to wct or adain by name."""
    if kind == "wct":
        return wct(content, style, masks=masks, alpha=alpha)
    if kind == "adain":
        return adain(content, style, masks=masks, alpha=alpha)
    raise ContractViolation(f"unknown transform {kind!r}; expected 'wct' or 'adain'")
