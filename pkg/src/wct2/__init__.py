"""Photorealistic style transfer via wavelet-corrected whitening and coloring."""

from .errors import (
    BadMagicError,
    ChecksumError,
    ContractViolation,
    DegenerateRegionError,
    MissingTensorError,
    PipelineError,
    TensorShapeError,
    TruncatedPayloadError,
    VersionMismatchError,
    WeightFormatError,
)
from .metrics import MetricReport, compute_report, edge_response, psnr, ssim, style_loss
from .network import (
    ForwardTrace,
    Model,
    StylizeSchedule,
    build_model,
    build_plumbing_model,
    decoder_parameter_count,
    encode,
    encoder_parameter_count,
    multi_level_stylize,
    reconstruct,
    stylize_forward,
    synthetic_weights,
)
from .pipeline import CropRecord, ImageBuffer, StylizeOptions, prepare, run_stylize, unprepare
from .stylize import (
    SegmentationMap,
    StyleStats,
    adain,
    color,
    compute_stats,
    wct,
    whiten,
)
from .tensor import ConvLayer, FeatureMap, PaddingMode, conv2d, reflect_pad, relu
from .wavelet import (
    WaveletSubbands,
    average_pool,
    average_unpool,
    haar_kernels,
    haar_pool,
    haar_unpool,
    max_pool_with_mask,
    max_unpool,
    split_pool,
    split_unpool,
)
from .weights import WeightStore, load, save

__version__ = "0.1.0"
