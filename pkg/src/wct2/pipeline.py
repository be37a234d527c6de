"""Image I/O, geometry preparation, and the end-to-end stylization entry point.

Pixels travel as [0, 1] floats with no dataset mean/std normalization; the
weight container contract assumes the same. Images are optionally downscaled
so the longer side fits --max-side, then reflect-padded bottom/right up to the
next multiple of 8 so the three stride-2 poolings divide evenly; the recorded
crop restores the pre-pad size, so output dimensions equal input dimensions
(after any max-side downscale).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import ContractViolation, PipelineError
from .metrics import MetricReport, compute_report
from .network import (
    Model,
    StylizeSchedule,
    build_model,
    build_plumbing_model,
    multi_level_stylize,
    stylize_forward,
)
from .stylize import SegmentationMap
from .tensor import FeatureMap, pad_to_multiple
from . import weights as weights_io


class ImageBuffer:
    """An 8-bit RGB image (height, width, 3)."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray) -> None:
        arr = np.ascontiguousarray(pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ContractViolation(f"image buffer must be (H, W, 3) uint8, got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ContractViolation("image has a zero dimension")
        arr.setflags(write=False)
        self.pixels = arr

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_file(cls, path, role: str = "image") -> "ImageBuffer":
        if not os.path.isfile(path):
            raise PipelineError(f"{role} not found: {path}")
        try:
            with Image.open(path) as img:
                rgb = img.convert("RGB")
                return cls(np.asarray(rgb))
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(f"could not read {role} {path}: {exc}") from exc

    def to_file(self, path) -> None:
        Image.fromarray(np.asarray(self.pixels)).save(path, format="PNG")

    def to_features(self) -> FeatureMap:
        scaled = self.pixels.astype(np.float32) / np.float32(255.0)
        return FeatureMap(np.transpose(scaled, (2, 0, 1)))

    @classmethod
    def from_features(cls, fm: FeatureMap) -> "ImageBuffer":
        if fm.channels != 3:
            raise ContractViolation(f"image features must have 3 channels, got {fm.channels}")
        clamped = np.clip(fm.data, 0.0, 1.0)
        quantized = np.rint(clamped * 255.0).astype(np.uint8)
        return cls(np.transpose(quantized, (1, 2, 0)))


@dataclass(frozen=True)
class CropRecord:
    """Pre-pad spatial size; inverts the reflect padding applied by prepare."""

    height: int
    width: int


def prepare(image: ImageBuffer, max_side: int | None = None) -> tuple[FeatureMap, CropRecord]:
    """Optionally downscale to max_side, then reflect-pad to a multiple of 8."""
    working = image
    if max_side is not None:
        if max_side < 8:
            raise ContractViolation(f"max side must be >= 8, got {max_side}")
        longest = max(image.height, image.width)
        if longest > max_side:
            scale = max_side / longest
            new_h = max(1, round(image.height * scale))
            new_w = max(1, round(image.width * scale))
            resized = Image.fromarray(np.asarray(image.pixels)).resize((new_w, new_h), Image.BILINEAR)
            working = ImageBuffer(np.asarray(resized))
    fm = working.to_features()
    padded, _, _ = pad_to_multiple(fm, 8)
    return padded, CropRecord(height=working.height, width=working.width)


def unprepare(fm: FeatureMap, crop: CropRecord) -> FeatureMap:
    """Crop the reflect padding recorded by prepare."""
    if crop.height > fm.height or crop.width > fm.width:
        raise ContractViolation(f"crop {crop} exceeds feature size {fm.shape}")
    if crop.height == fm.height and crop.width == fm.width:
        return fm
    return FeatureMap(fm.data[:, : crop.height, : crop.width])


def load_segmentation(path, image: ImageBuffer, role: str, max_side: int | None) -> SegmentationMap:
    """Read a grayscale label map, check it matches its image, track the resize.

    Pixel value encodes the label id. The map must match the original image
    dimensions; it is nearest-neighbor resized alongside the image and
    reflect-padded to the same multiple-of-8 geometry.
    """
    if not os.path.isfile(path):
        raise PipelineError(f"{role} not found: {path}")
    try:
        with Image.open(path) as img:
            labels = np.asarray(img.convert("L"))
    except Exception as exc:
        raise PipelineError(f"could not read {role} {path}: {exc}") from exc
    if labels.shape != (image.height, image.width):
        raise PipelineError(
            f"{role} {path} is {labels.shape[0]}x{labels.shape[1]} but its image is "
            f"{image.height}x{image.width}"
        )
    target_h, target_w = image.height, image.width
    if max_side is not None and max(image.height, image.width) > max_side:
        scale = max_side / max(image.height, image.width)
        target_h = max(1, round(image.height * scale))
        target_w = max(1, round(image.width * scale))
    if (target_h, target_w) != labels.shape:
        resized = Image.fromarray(labels).resize((target_w, target_h), Image.NEAREST)
        labels = np.asarray(resized)
    pad_h = (-target_h) % 8
    pad_w = (-target_w) % 8
    if pad_h or pad_w:
        labels = np.pad(labels, ((0, pad_h), (0, pad_w)), mode="reflect")
    return SegmentationMap(labels.astype(np.int64))


@dataclass
class StylizeOptions:
    """CLI-facing knobs for one stylization run."""

    weights_path: str | None = None
    plumbing: bool = False
    unpool: str = "concat"
    pooling: str = "haar"
    transform: str = "wct"
    alpha: float = 1.0
    skip_wct: bool = False
    decoder_wct: bool = False
    multi_level: bool = False
    max_side: int | None = None
    compute_metrics: bool = False
    schedule_overrides: dict = field(default_factory=dict)

    def schedule(self) -> StylizeSchedule:
        return StylizeSchedule(
            encoder_wct=True,
            skip_wct=self.skip_wct,
            decoder_wct=self.decoder_wct,
            multi_level=self.multi_level,
            transform=self.transform,
            alpha=self.alpha,
            **self.schedule_overrides,
        )


def load_model(options: StylizeOptions) -> Model:
    if options.plumbing:
        return build_plumbing_model(decoder_mode="sum", pooling=options.pooling)
    if not options.weights_path:
        raise PipelineError("no weights file given (use --weights, WCT2_WEIGHTS, or --plumbing)")
    if not os.path.isfile(options.weights_path):
        raise PipelineError(f"weights file not found: {options.weights_path}")
    store = weights_io.load(options.weights_path)
    return build_model(store, decoder_mode=options.unpool, pooling=options.pooling)


def run_stylize(
    content_path,
    style_path,
    content_seg_path=None,
    style_seg_path=None,
    options: StylizeOptions | None = None,
    model: Model | None = None,
) -> tuple[ImageBuffer, MetricReport | None]:
    """Full pipeline: load, prepare, stylize, unprepare, quantize.

    Deterministic: identical inputs and options produce identical pixels.
    """
    options = options or StylizeOptions()
    if (content_seg_path is None) != (style_seg_path is None):
        raise PipelineError("segmentation maps must be given for both content and style, or neither")

    content_img = ImageBuffer.from_file(content_path, role="content image")
    style_img = ImageBuffer.from_file(style_path, role="style image")
    if model is None:
        model = load_model(options)

    content_fm, crop = prepare(content_img, options.max_side)
    style_fm, _ = prepare(style_img, options.max_side)

    masks = None
    if content_seg_path is not None:
        seg_c = load_segmentation(content_seg_path, content_img, "content segmentation", options.max_side)
        seg_s = load_segmentation(style_seg_path, style_img, "style segmentation", options.max_side)
        if (seg_c.height, seg_c.width) != (content_fm.height, content_fm.width):
            raise PipelineError("content segmentation does not match the prepared image size")
        if (seg_s.height, seg_s.width) != (style_fm.height, style_fm.width):
            raise PipelineError("style segmentation does not match the prepared image size")
        masks = (seg_c, seg_s)

    schedule = options.schedule()
    if schedule.multi_level:
        stylized = multi_level_stylize(model, content_fm, style_fm, masks=masks, schedule=schedule)
    else:
        stylized = stylize_forward(model, content_fm, style_fm, masks=masks, schedule=schedule)

    output_fm = unprepare(stylized, crop)
    output_img = ImageBuffer.from_features(output_fm)

    report = None
    if options.compute_metrics:
        content_working = unprepare(content_fm, crop)
        # Compare quantized output pixels, i.e. what actually lands on disk.
        report = compute_report(content_working, style_fm, output_img.to_features(), model)
    return output_img, report
