"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see every line. The
weights-dependent reconstruction check skips itself unless WCT2_WEIGHTS points
at a trained container.
"""

import os
import time

import numpy as np
import pytest
from PIL import Image

from wct2.cli import main
from wct2.metrics import ssim, style_loss
from wct2.network import (
    build_model,
    build_plumbing_model,
    reconstruct,
    stylize_forward,
    synthetic_weights,
)
from wct2.pipeline import ImageBuffer, prepare, unprepare
from wct2.stylize import adain, compute_stats, wct, whiten
from wct2.tensor import ConvLayer, FeatureMap, PaddingMode, conv2d
from wct2.wavelet import haar_pool, haar_unpool
from wct2.weights import save

from conftest import synthetic_photo
from oracles import naive_conv2d, naive_ssim, psnr


def _criterion(name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {status} {name}: {detail}")
    assert passed, f"{name}: {detail}"


def _corpus(seed: int = 42, count: int = 100):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        c = int(rng.integers(1, 9))
        h = 2 * int(rng.integers(1, 33))
        w = 2 * int(rng.integers(1, 33))
        yield FeatureMap(rng.standard_normal((c, h, w)).astype(np.float32))


def test_perfect_reconstruction():
    start = time.perf_counter()
    worst = 0.0
    for x in _corpus():
        back = haar_unpool(haar_pool(x))
        worst = max(worst, float(np.abs(back.data - x.data).max()))
    elapsed = time.perf_counter() - start
    _criterion(
        "perfect-reconstruction",
        worst < 1e-5 and elapsed < 5.0,
        f"max inf-norm error {worst:.3e} over 100 tensors in {elapsed:.2f}s (< 1e-5, < 5s)",
    )


def test_tight_frame_energy():
    worst = 0.0
    for x in _corpus():
        bands = haar_pool(x)
        energy_in = float(np.sum(x.data.astype(np.float64) ** 2))
        energy_out = float(sum(np.sum(b.data.astype(np.float64) ** 2) for b in bands.as_tuple()))
        worst = max(worst, abs(energy_in - energy_out) / energy_in)
    _criterion("tight-frame-energy", worst < 1e-6, f"max relative energy drift {worst:.3e} (< 1e-6)")


def test_whitening_and_coloring():
    rng = np.random.default_rng(43)
    worst_off = worst_diag = worst_color = 0.0
    for c in (4, 8, 32):
        n = 64 * c
        content = FeatureMap(
            (rng.standard_normal((c, c)) @ rng.standard_normal((c, n))).astype(np.float32).reshape(c, 1, n)
        )
        stats = compute_stats(content)
        white = whiten(content, stats).data.reshape(c, -1).astype(np.float64)
        cov = white @ white.T / (n - 1)
        worst_off = max(worst_off, float(np.abs(cov - np.diag(np.diag(cov))).max()))
        worst_diag = max(worst_diag, float(np.abs(np.diag(cov) - 1.0).max()))

        style = FeatureMap(
            (rng.standard_normal((c, c)) @ rng.standard_normal((c, n))).astype(np.float32).reshape(c, 1, n)
        )
        out = wct(content, style).data.reshape(c, -1).astype(np.float64)
        style_cov = compute_stats(style).covariance
        gap = np.linalg.norm(np.cov(out, ddof=1) - style_cov) / np.linalg.norm(style_cov)
        worst_color = max(worst_color, float(gap))
    passed = worst_off < 1e-4 and worst_diag < 1e-3 and worst_color < 1e-3
    _criterion(
        "whitening-coloring",
        passed,
        f"whiten off-diag {worst_off:.3e} (< 1e-4), diag {worst_diag:.3e} (< 1e-3), "
        f"coloring rel Frobenius {worst_color:.3e} (< 1e-3)",
    )


def test_adain_moments():
    rng = np.random.default_rng(44)
    c, n = 32, 2048
    content = FeatureMap(rng.standard_normal((c, 1, n)).astype(np.float32))
    style = FeatureMap((rng.standard_normal((c, n)) * 1.3 + 0.2).astype(np.float32).reshape(c, 1, n))
    out = adain(content, style).data.reshape(c, -1).astype(np.float64)
    sty = style.data.reshape(c, -1).astype(np.float64)
    mean_gap = float(np.abs(out.mean(axis=1) - sty.mean(axis=1)).max())
    std_gap = float(np.abs(out.std(axis=1) - sty.std(axis=1)).max())
    _criterion(
        "adain-moments",
        mean_gap < 1e-5 and std_gap < 1e-5,
        f"mean gap {mean_gap:.3e}, std gap {std_gap:.3e} (< 1e-5)",
    )


def test_convolution_oracle():
    rng = np.random.default_rng(45)
    worst = 0.0
    for index in range(50):
        cin, cout = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        h, w = int(rng.integers(3, 17)), int(rng.integers(3, 17))
        data = rng.standard_normal((cin, h, w)).astype(np.float32)
        weight = rng.standard_normal((cout, cin, 3, 3)).astype(np.float32)
        bias = rng.standard_normal(cout).astype(np.float32)
        reflect = index % 2 == 0
        mode = PaddingMode.REFLECT if reflect else PaddingMode.ZERO
        fast = conv2d(FeatureMap(data), ConvLayer(weight=weight, bias=bias), mode).data
        slow = naive_conv2d(data, weight, bias, reflect)
        worst = max(worst, float(np.abs(fast.astype(np.float64) - slow.astype(np.float64)).max()))
    _criterion("conv-oracle", worst < 1e-6, f"max |fast - naive| {worst:.3e} over 50 instances (< 1e-6)")


def test_parameter_ratio():
    concat = build_model(synthetic_weights(46, "concat"), decoder_mode="concat")
    summed = build_model(synthetic_weights(46, "sum"), decoder_mode="sum")
    ratio = concat.decoder_parameters / summed.decoder_parameters
    _criterion(
        "parameter-ratio",
        1.75 <= ratio <= 1.85,
        f"concat {concat.decoder_parameters} / sum {summed.decoder_parameters} = {ratio:.4f} "
        "(required within [1.75, 1.85]; the mirror decoder with five-component concatenation "
        "yields 1.8834, so the nominal 1.80 factor is not attainable from this architecture)",
    )


def test_metric_sanity():
    rng = np.random.default_rng(47)
    x = FeatureMap(rng.uniform(0, 1, (1, 24, 24)).astype(np.float32))
    self_ssim = ssim(x, x)
    a = rng.uniform(0, 1, (1, 20, 22)).astype(np.float32)
    b = rng.uniform(0, 1, (1, 20, 22)).astype(np.float32)
    oracle_gap = abs(ssim(FeatureMap(a), FeatureMap(b)) - naive_ssim(a[0], b[0]))
    model = build_model(synthetic_weights(47, "sum"), decoder_mode="sum")
    image = FeatureMap(rng.uniform(0, 1, (3, 16, 16)).astype(np.float32))
    zero_loss, _ = style_loss(image, image, model)
    passed = abs(self_ssim - 1.0) < 1e-9 and zero_loss < 1e-8 and oracle_gap < 1e-6
    _criterion(
        "metric-sanity",
        passed,
        f"ssim(x,x)-1 = {self_ssim - 1.0:.2e} (< 1e-9), style_loss(x,x) = {zero_loss:.2e} (< 1e-8), "
        f"ssim oracle gap {oracle_gap:.2e} (< 1e-6)",
    )


def test_ablation_ordering():
    rng = np.random.default_rng(48)
    image = FeatureMap(rng.uniform(0, 1, (3, 32, 32)).astype(np.float32))
    haar_err = float(np.abs(reconstruct(build_plumbing_model(pooling="haar"), image).data - image.data).max())
    max_err = float(np.abs(reconstruct(build_plumbing_model(pooling="max"), image).data - image.data).max())
    _criterion(
        "ablation-ordering",
        haar_err < 1e-5 and max_err > 0.0,
        f"conv-bypassed round trip: haar error {haar_err:.3e} (< 1e-5), max-pool error {max_err:.3e} (> 0)",
    )


def test_cli_determinism(tmp_path):
    weights_path = tmp_path / "weights.bin"
    save(synthetic_weights(49, "concat"), weights_path)
    content = tmp_path / "content.png"
    style = tmp_path / "style.png"
    Image.fromarray(synthetic_photo(32, 32, 490)).save(content)
    Image.fromarray(synthetic_photo(32, 32, 491)).save(style)
    outputs = []
    for name in ("first.png", "second.png"):
        out = tmp_path / name
        code = main(
            [
                "stylize",
                "--content", str(content),
                "--style", str(style),
                "--output", str(out),
                "--weights", str(weights_path),
            ]
        )
        assert code == 0
        outputs.append(out.read_bytes())
    _criterion(
        "cli-determinism",
        outputs[0] == outputs[1],
        f"two identical invocations wrote identical bytes ({len(outputs[0])} bytes)",
    )


def test_desk_scale_substitute(tmp_path):
    # Targets this desk-scale build explicitly does not attempt: GPU-class
    # absolute runtimes at megapixel sizes, absolute SSIM/style-loss curve
    # values (the learned edge detector is replaced by Sobel and no trained
    # baselines exist here), human preference studies, and visual quality
    # without trained weights. The substitute asserted instead: a 256x256
    # stylization finishes in under 60 s on a commodity CPU.
    model = build_model(synthetic_weights(50, "concat"), decoder_mode="concat")
    content = FeatureMap(synthetic_photo(256, 256, 500).transpose(2, 0, 1).astype(np.float32) / 255.0)
    style = FeatureMap(synthetic_photo(256, 256, 501).transpose(2, 0, 1).astype(np.float32) / 255.0)
    start = time.perf_counter()
    out = stylize_forward(model, content, style)
    elapsed = time.perf_counter() - start
    _criterion(
        "desk-scale-substitute",
        elapsed < 60.0 and out.shape == (3, 256, 256),
        f"256x256 stylization in {elapsed:.1f}s (< 60s)",
    )


def test_reconstruction_psnr_with_real_weights():
    weights_path = os.environ.get("WCT2_WEIGHTS")
    if not weights_path or not os.path.isfile(weights_path):
        pytest.skip("WCT2_WEIGHTS not set; reconstruction PSNR check needs trained weights")
    from wct2 import weights as weights_io

    store = weights_io.load(weights_path)
    mode = "concat" if store.get("decoder.conv3_4.weight").shape[1] == 1280 else "sum"
    model = build_model(store, decoder_mode=mode)
    worst = float("inf")
    for seed in (510, 511, 512):
        image = ImageBuffer(synthetic_photo(96, 96, seed))
        fm, crop = prepare(image)
        out = unprepare(reconstruct(model, fm), crop)
        worst = min(worst, psnr(out.data, unprepare(fm, crop).data))
    _criterion(
        "reconstruction-psnr",
        worst > 30.0,
        f"min PSNR over 3 photographs {worst:.1f} dB (> 30 dB)",
    )
