"""Encoder-decoder with wavelet pooling, high-frequency skips, and progressive stylization.

The encoder is the VGG-19 front half (conv1_1 through conv4_1, 3x3 convs with
ReLU) with its three max-pooling sites replaced by a selectable pooling
operator. For subband poolings (haar, split) only the low/first component
continues down the encoder; the remaining components skip straight to the
matching decoder unpooling site. The decoder mirrors the encoder layer for
layer, with two unpooling flavors:

* sum: per-component transposed convolution summed, the exact inverse for
  haar and split pooling;
* concat: four per-component upsamplings concatenated channel-wise together
  with the feature saved just before pooling, so the conv right after each
  unpool sees 5x the channels and learns the recombination.

Stylization runs progressively in a single forward pass: the running content
feature is transformed against the style feature captured at the same site
(convX_1 outputs and the bottleneck by default, optionally the skip
components and the decoder convX_2 outputs).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, TensorShapeError
from .stylize import SegmentationMap, apply_transform
from .tensor import ConvLayer, FeatureMap, conv2d, relu
from .wavelet import (
    WaveletSubbands,
    average_pool,
    average_unpool,
    haar_kernels,
    haar_pool,
    haar_unpool,
    max_pool_with_mask,
    max_unpool,
    split_kernels,
    split_pool,
    split_unpool,
    upsample_with_kernel,
)
from .weights import WeightStore

logger = logging.getLogger(__name__)

POOLING_MODES = ("haar", "average", "split", "max")
UNPOOL_MODES = ("sum", "concat")
SUBBAND_POOLINGS = ("haar", "split")

# (name, in_channels, out_channels) with pooling sites interleaved.
ENCODER_PLAN = (
    ("conv", "conv1_1", 3, 64),
    ("conv", "conv1_2", 64, 64),
    ("pool", 1),
    ("conv", "conv2_1", 64, 128),
    ("conv", "conv2_2", 128, 128),
    ("pool", 2),
    ("conv", "conv3_1", 128, 256),
    ("conv", "conv3_2", 256, 256),
    ("conv", "conv3_3", 256, 256),
    ("conv", "conv3_4", 256, 256),
    ("pool", 3),
    ("conv", "conv4_1", 256, 512),
)

ENCODER_TAPS = ("conv1_1", "conv2_1", "conv3_1", "conv4_1")
DECODER_TAPS = ("conv3_2", "conv2_2", "conv1_2")
# Style statistics for a decoder site come from the encoder tap with the same
# channel count and scale.
DECODER_STYLE_SOURCES = {"conv3_2": "conv3_1", "conv2_2": "conv2_1", "conv1_2": "conv1_1"}

SKIP_COMPONENTS = ("lh", "hl", "hh")


def decoder_plan(unpool_mode: str):
    """Mirror of the encoder; concat mode widens the conv after each unpool to 5x."""
    mult = 5 if unpool_mode == "concat" else 1
    return (
        ("conv", "conv4_1", 512, 256, True),
        ("unpool", 3),
        ("conv", "conv3_4", 256 * mult, 256, True),
        ("conv", "conv3_3", 256, 256, True),
        ("conv", "conv3_2", 256, 256, True),
        ("conv", "conv3_1", 256, 128, True),
        ("unpool", 2),
        ("conv", "conv2_2", 128 * mult, 128, True),
        ("conv", "conv2_1", 128, 64, True),
        ("unpool", 1),
        ("conv", "conv1_2", 64 * mult, 64, True),
        ("conv", "conv1_1", 64, 3, False),
    )


def encoder_parameter_count() -> int:
    """Closed-form parameter total of the encoder plan."""
    total = 0
    for step in ENCODER_PLAN:
        if step[0] == "conv":
            _, _, cin, cout = step
            total += cout * cin * 9 + cout
    return total


def decoder_parameter_count(unpool_mode: str) -> int:
    """Closed-form parameter total of the decoder plan for one unpool mode."""
    _check_unpool_mode(unpool_mode)
    total = 0
    for step in decoder_plan(unpool_mode):
        if step[0] == "conv":
            _, _, cin, cout, _ = step
            total += cout * cin * 9 + cout
    return total


def _check_unpool_mode(mode: str) -> None:
    if mode not in UNPOOL_MODES:
        raise ContractViolation(f"unknown unpool mode {mode!r}; expected one of {UNPOOL_MODES}")


def _check_pooling(pooling: str) -> None:
    if pooling not in POOLING_MODES:
        raise ContractViolation(f"unknown pooling {pooling!r}; expected one of {POOLING_MODES}")


@dataclass(frozen=True)
class Model:
    """Immutable assembled network. encoder/decoder are None in plumbing mode
    (convolutions bypassed; only pooling/unpooling run)."""

    decoder_mode: str
    pooling: str
    encoder: dict[str, ConvLayer] | None
    decoder: dict[str, ConvLayer] | None

    @property
    def plumbing(self) -> bool:
        return self.encoder is None

    @property
    def encoder_parameters(self) -> int:
        return 0 if self.encoder is None else sum(l.parameter_count for l in self.encoder.values())

    @property
    def decoder_parameters(self) -> int:
        return 0 if self.decoder is None else sum(l.parameter_count for l in self.decoder.values())

    @property
    def total_parameters(self) -> int:
        return self.encoder_parameters + self.decoder_parameters


def _layer_from_store(store: WeightStore, prefix: str, name: str, cin: int, cout: int) -> ConvLayer:
    weight = store.get(f"{prefix}.{name}.weight")
    bias = store.get(f"{prefix}.{name}.bias")
    if weight.shape != (cout, cin, 3, 3):
        raise TensorShapeError(
            f"{prefix}.{name}.weight has shape {weight.shape}, expected {(cout, cin, 3, 3)}"
        )
    if bias.shape != (cout,):
        raise TensorShapeError(f"{prefix}.{name}.bias has shape {bias.shape}, expected {(cout,)}")
    return ConvLayer(weight=weight, bias=bias, name=f"{prefix}.{name}")


def build_model(store: WeightStore, decoder_mode: str = "concat", pooling: str = "haar") -> Model:
    """Assemble the network from a weight store, validating names and shapes."""
    _check_unpool_mode(decoder_mode)
    _check_pooling(pooling)
    if decoder_mode == "concat" and pooling not in SUBBAND_POOLINGS:
        raise ContractViolation(
            f"concat unpooling needs a four-component pooling (one of {SUBBAND_POOLINGS}), got {pooling!r}"
        )
    encoder = {}
    for step in ENCODER_PLAN:
        if step[0] == "conv":
            _, name, cin, cout = step
            encoder[name] = _layer_from_store(store, "encoder", name, cin, cout)
    decoder = {}
    for step in decoder_plan(decoder_mode):
        if step[0] != "conv":
            continue
        _, name, cin, cout, _ = step
        decoder[name] = _layer_from_store(store, "decoder", name, cin, cout)
    model = Model(decoder_mode=decoder_mode, pooling=pooling, encoder=encoder, decoder=decoder)
    logger.info(
        "built model (pooling=%s, unpool=%s): encoder %d params, decoder %d params",
        pooling,
        decoder_mode,
        model.encoder_parameters,
        model.decoder_parameters,
    )
    return model


def build_plumbing_model(decoder_mode: str = "sum", pooling: str = "haar") -> Model:
    """A model with every convolution bypassed; features keep their channel count.

    Used to test the pooling/unpooling plumbing in isolation and as the
    weight-free pipeline mode. Only sum unpooling is possible (there is no
    conv to absorb concatenated channels).
    """
    _check_unpool_mode(decoder_mode)
    _check_pooling(pooling)
    if decoder_mode != "sum":
        raise ContractViolation("plumbing models support sum unpooling only")
    return Model(decoder_mode=decoder_mode, pooling=pooling, encoder=None, decoder=None)


def synthetic_weights(seed: int = 42, decoder_mode: str = "concat") -> WeightStore:
    """Seeded random, correctly shaped weights (He-scaled, zero bias)."""
    _check_unpool_mode(decoder_mode)
    rng = np.random.default_rng(seed)
    store = WeightStore()

    def add(prefix: str, name: str, cin: int, cout: int) -> None:
        scale = np.sqrt(2.0 / (cin * 9))
        store.add(f"{prefix}.{name}.weight", rng.normal(0.0, scale, size=(cout, cin, 3, 3)).astype(np.float32))
        store.add(f"{prefix}.{name}.bias", np.zeros(cout, dtype=np.float32))

    for step in ENCODER_PLAN:
        if step[0] == "conv":
            _, name, cin, cout = step
            add("encoder", name, cin, cout)
    for step in decoder_plan(decoder_mode):
        if step[0] == "conv":
            _, name, cin, cout, _ = step
            add("decoder", name, cin, cout)
    return store


@dataclass
class EncodeResult:
    """Bottleneck feature, per-level skip payloads, and per-scale tap features."""

    bottleneck: FeatureMap
    skips: dict[int, dict[str, object]]
    taps: dict[str, FeatureMap]


@dataclass
class StylizeSchedule:
    """Which sites get transformed during one forward pass.

    Defaults transform only the low-frequency path at the four encoder taps.
    """

    encoder_wct: bool = True
    skip_wct: bool = False
    decoder_wct: bool = False
    multi_level: bool = False
    transform: str = "wct"
    alpha: float = 1.0

    def __post_init__(self):
        if self.transform not in ("wct", "adain"):
            raise ContractViolation(f"transform must be 'wct' or 'adain', got {self.transform!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ContractViolation(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass
class ForwardTrace:
    """Instrumentation collected during stylize_forward."""

    sites: list[str] = field(default_factory=list)
    site_relative_change: dict[str, float] = field(default_factory=dict)
    encoder_skips: dict | None = None
    decoder_skips: dict | None = None

    def record(self, site: str, before: FeatureMap, after: FeatureMap) -> None:
        self.sites.append(site)
        denom = float(np.linalg.norm(before.data))
        delta = float(np.linalg.norm(after.data.astype(np.float64) - before.data.astype(np.float64)))
        self.site_relative_change[site] = delta / denom if denom > 0 else delta


def _pool_step(model: Model, x: FeatureMap) -> tuple[FeatureMap, dict[str, object]]:
    concat = model.decoder_mode == "concat"
    if model.pooling == "haar":
        sb = haar_pool(x)
        payload: dict[str, object] = {"lh": sb.lh, "hl": sb.hl, "hh": sb.hh}
        if concat:
            payload["pre_pool"] = x
        return sb.ll, payload
    if model.pooling == "split":
        sb = split_pool(x)
        payload = {"lh": sb.lh, "hl": sb.hl, "hh": sb.hh}
        if concat:
            payload["pre_pool"] = x
        return sb.ll, payload
    if model.pooling == "average":
        return average_pool(x), {}
    pooled, mask = max_pool_with_mask(x)
    return pooled, {"mask": mask}


def _component_kernels(pooling: str) -> np.ndarray:
    return haar_kernels().astype(np.float32) if pooling == "haar" else split_kernels().astype(np.float32)


def _unpool_step(model: Model, x: FeatureMap, payload: dict[str, object]) -> FeatureMap:
    if model.pooling in SUBBAND_POOLINGS:
        subbands = WaveletSubbands(ll=x, lh=payload["lh"], hl=payload["hl"], hh=payload["hh"])
        if model.decoder_mode == "sum":
            return haar_unpool(subbands) if model.pooling == "haar" else split_unpool(subbands)
        kernels = _component_kernels(model.pooling)
        components = [
            upsample_with_kernel(band.data, kernel)
            for band, kernel in zip(subbands.as_tuple(), kernels)
        ]
        pre_pool: FeatureMap = payload["pre_pool"]
        if pre_pool.shape != components[0].shape:
            raise ContractViolation(
                f"pre-pool feature shape {pre_pool.shape} does not match upsampled components {components[0].shape}"
            )
        return FeatureMap(np.concatenate(components + [pre_pool.data], axis=0))
    if model.pooling == "average":
        return average_unpool(x)
    return max_unpool(x, payload["mask"])


def encode(model: Model, image: FeatureMap, site_hook=None) -> EncodeResult:
    """Forward pass through the encoder, recording taps and skip payloads.

    ``site_hook(site_name, feature) -> feature`` runs at each tap and its
    result continues down the network (progressive stylization).
    """
    if image.height % 8 or image.width % 8:
        raise ContractViolation(
            f"encoder input spatial size must be divisible by 8, got {image.height}x{image.width}"
        )
    if model.encoder is not None and image.channels != 3:
        raise ContractViolation(f"encoder expects 3 input channels, got {image.channels}")
    x = image
    skips: dict[int, dict[str, object]] = {}
    taps: dict[str, FeatureMap] = {}
    for op in ENCODER_PLAN:
        if op[0] == "conv":
            name = op[1]
            if model.encoder is not None:
                x = relu(conv2d(x, model.encoder[name]))
            if name in ENCODER_TAPS:
                if site_hook is not None:
                    x = site_hook(f"encoder.{name}", x)
                taps[name] = x
        else:
            level = op[1]
            x, skips[level] = _pool_step(model, x)
    return EncodeResult(bottleneck=x, skips=skips, taps=taps)


def decode(model: Model, bottleneck: FeatureMap, skips: dict[int, dict[str, object]], site_hook=None) -> FeatureMap:
    """Mirror pass through the decoder, aggregating skips at each unpool site."""
    x = bottleneck
    for step in decoder_plan(model.decoder_mode):
        if step[0] == "conv":
            _, name, _, _, use_relu = step
            if model.decoder is not None:
                x = conv2d(x, model.decoder[name])
                if use_relu:
                    x = relu(x)
            if name in DECODER_TAPS and site_hook is not None:
                x = site_hook(f"decoder.{name}", x)
        else:
            level = step[1]
            if level not in skips:
                raise ContractViolation(f"missing skip payload for pooling level {level}")
            x = _unpool_step(model, x, skips[level])
    return x


def reconstruct(model: Model, image: FeatureMap) -> FeatureMap:
    """Encode then decode with no transforms (identity pipeline up to model loss)."""
    result = encode(model, image)
    return decode(model, result.bottleneck, result.skips)


def _downsample_segmentation(seg: SegmentationMap, height: int, width: int) -> SegmentationMap:
    """Nearest-neighbor label downsampling to a feature resolution (exact factor)."""
    if seg.height == height and seg.width == width:
        return seg
    if seg.height % height or seg.width % width:
        raise ContractViolation(
            f"segmentation {seg.height}x{seg.width} is not an integer multiple of site {height}x{width}"
        )
    fh, fw = seg.height // height, seg.width // width
    return SegmentationMap(np.ascontiguousarray(seg.labels[::fh, ::fw]))


def _site_masks(masks, content_fm: FeatureMap, style_fm: FeatureMap):
    if masks is None:
        return None
    seg_c, seg_s = masks
    return (
        _downsample_segmentation(seg_c, content_fm.height, content_fm.width),
        _downsample_segmentation(seg_s, style_fm.height, style_fm.width),
    )


def stylize_forward(
    model: Model,
    content: FeatureMap,
    style: FeatureMap | None = None,
    masks=None,
    schedule: StylizeSchedule | None = None,
    style_ctx: EncodeResult | None = None,
    trace: ForwardTrace | None = None,
) -> FeatureMap:
    """One progressive stylization pass.

    The style image is encoded once (or a cached EncodeResult is reused) to
    collect its taps and skips; the content is then encoded with the chosen
    transform applied at every scheduled site, and decoded with its own skip
    payloads (transformed too when skip_wct is on). With alpha = 0 every
    transform is skipped and the pass equals plain reconstruction bit for bit.
    """
    schedule = schedule or StylizeSchedule()
    if style_ctx is None:
        if style is None:
            raise ContractViolation("stylize_forward needs a style image or a cached style encoding")
        style_ctx = encode(model, style)
    active = schedule.alpha > 0.0

    encoder_hook = None
    if active and schedule.encoder_wct:

        def encoder_hook(site: str, fm: FeatureMap) -> FeatureMap:
            name = site.split(".", 1)[1]
            style_fm = style_ctx.taps[name]
            out = apply_transform(
                schedule.transform, fm, style_fm, masks=_site_masks(masks, fm, style_fm), alpha=schedule.alpha
            )
            if trace is not None:
                trace.record(site, fm, out)
            return out

    enc = encode(model, content, site_hook=encoder_hook)
    if trace is not None:
        trace.encoder_skips = enc.skips

    skips = enc.skips
    if active and schedule.skip_wct and model.pooling in SUBBAND_POOLINGS:
        skips = {}
        for level, payload in enc.skips.items():
            new_payload = dict(payload)
            for component in SKIP_COMPONENTS:
                cfm: FeatureMap = payload[component]
                sfm: FeatureMap = style_ctx.skips[level][component]
                out = apply_transform(
                    schedule.transform, cfm, sfm, masks=_site_masks(masks, cfm, sfm), alpha=schedule.alpha
                )
                if trace is not None:
                    trace.record(f"skip{level}.{component}", cfm, out)
                new_payload[component] = out
            skips[level] = new_payload
    if trace is not None:
        trace.decoder_skips = skips

    decoder_hook = None
    if active and schedule.decoder_wct:

        def decoder_hook(site: str, fm: FeatureMap) -> FeatureMap:
            name = site.split(".", 1)[1]
            style_fm = style_ctx.taps[DECODER_STYLE_SOURCES[name]]
            out = apply_transform(
                schedule.transform, fm, style_fm, masks=_site_masks(masks, fm, style_fm), alpha=schedule.alpha
            )
            if trace is not None:
                trace.record(site, fm, out)
            return out

    return decode(model, enc.bottleneck, skips, site_hook=decoder_hook)


def multi_level_stylize(
    model: Model,
    content: FeatureMap,
    style: FeatureMap,
    masks=None,
    schedule: StylizeSchedule | None = None,
    passes: int = 4,
    trace: ForwardTrace | None = None,
) -> FeatureMap:
    """Repeat the full pass coarse-to-fine, feeding each output into the next.

    The style encoding is computed once and shared across passes.
    """
    if passes < 1:
        raise ContractViolation(f"passes must be >= 1, got {passes}")
    style_ctx = encode(model, style)
    x = content
    for _ in range(passes):
        x = stylize_forward(model, x, masks=masks, schedule=schedule, style_ctx=style_ctx, trace=trace)
    return x
