"""Runnable invariant suite: frame identities, transform properties, conv oracle.

Every check runs on data derived from one seed, so two runs with the same
seed print the same table. The Haar checks accept a kernel perturbation hook
so the suite can demonstrate that it actually detects a broken filter bank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stylize
from .network import build_model, build_plumbing_model, reconstruct, synthetic_weights
from .tensor import ConvLayer, FeatureMap, PaddingMode, conv2d
from .wavelet import haar_kernels, pool_with_kernels, unpool_with_kernels

PARAMETER_RATIO_BAND = (1.75, 1.85)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _perturbed_kernels(epsilon: float) -> np.ndarray:
    kernels = haar_kernels()
    kernels[0, 0, 0] += epsilon
    return kernels.astype(np.float32)


def _random_even_shape(rng: np.random.Generator, max_channels=8, max_side=64) -> tuple[int, int, int]:
    c = int(rng.integers(1, max_channels + 1))
    h = 2 * int(rng.integers(1, max_side // 2 + 1))
    w = 2 * int(rng.integers(1, max_side // 2 + 1))
    return c, h, w


def check_kernel_orthonormality(seed: int, perturb_haar: float = 0.0) -> CheckResult:
    """Flattened 2x2 kernels times their transpose must be the identity."""
    kernels = _perturbed_kernels(perturb_haar).astype(np.float64).reshape(4, 4)
    residual = float(np.abs(kernels @ kernels.T - np.eye(4)).max())
    return CheckResult("kernel-orthonormality", residual < 1e-7, f"max residual {residual:.3e}")


def check_tight_frame(seed: int, perturb_haar: float = 0.0, count: int = 100) -> CheckResult:
    """Pool-then-unpool must reproduce every input within 1e-5 (inf norm)."""
    rng = np.random.default_rng(seed)
    kernels = _perturbed_kernels(perturb_haar)
    worst = 0.0
    for _ in range(count):
        data = rng.standard_normal(_random_even_shape(rng)).astype(np.float32)
        bands = pool_with_kernels(data, kernels)
        back = unpool_with_kernels([b for b in bands], kernels)
        worst = max(worst, float(np.abs(back - data).max()))
    return CheckResult(
        "tight-frame-roundtrip", worst < 1e-5, f"max |x - inv(fwd(x))| {worst:.3e} over {count} tensors"
    )


def check_parseval(seed: int, perturb_haar: float = 0.0, count: int = 100) -> CheckResult:
    """Energy must be conserved across the four subbands (relative 1e-6)."""
    rng = np.random.default_rng(seed)
    kernels = _perturbed_kernels(perturb_haar)
    worst = 0.0
    for _ in range(count):
        data = rng.standard_normal(_random_even_shape(rng)).astype(np.float32)
        bands = pool_with_kernels(data, kernels)
        energy_in = float(np.sum(data.astype(np.float64) ** 2))
        energy_out = float(sum(np.sum(b.astype(np.float64) ** 2) for b in bands))
        worst = max(worst, abs(energy_in - energy_out) / energy_in)
    return CheckResult("parseval-energy", worst < 1e-6, f"max relative energy drift {worst:.3e}")


def check_linearity(seed: int, perturb_haar: float = 0.0, count: int = 20) -> CheckResult:
    """Pooling is linear: fwd(a*x + b*y) == a*fwd(x) + b*fwd(y) within 1e-5."""
    rng = np.random.default_rng(seed)
    kernels = _perturbed_kernels(perturb_haar)
    worst = 0.0
    for _ in range(count):
        shape = _random_even_shape(rng, max_side=32)
        x = rng.standard_normal(shape).astype(np.float32)
        y = rng.standard_normal(shape).astype(np.float32)
        a, b = (float(v) for v in rng.uniform(-1.5, 1.5, size=2))
        combined = pool_with_kernels((a * x + b * y).astype(np.float32), kernels)
        separate = [a * bx + b * by for bx, by in zip(pool_with_kernels(x, kernels), pool_with_kernels(y, kernels))]
        worst = max(worst, max(float(np.abs(c - s).max()) for c, s in zip(combined, separate)))
    return CheckResult("pooling-linearity", worst < 1e-5, f"max deviation {worst:.3e}")


def check_whitening(seed: int) -> CheckResult:
    """Whitened features must have identity covariance (1e-4 off-diag, 1e-3 diag)."""
    rng = np.random.default_rng(seed)
    worst_off, worst_diag = 0.0, 0.0
    for c in (4, 8, 32):
        n = 64 * c
        mixing = rng.standard_normal((c, c))
        data = (mixing @ rng.standard_normal((c, n)) + rng.uniform(-2, 2, size=(c, 1))).astype(np.float32)
        fm = FeatureMap(data.reshape(c, 1, n))
        stats = stylize.compute_stats(fm)
        white = stylize.whiten(fm, stats).data.reshape(c, -1).astype(np.float64)
        cov = white @ white.T / (n - 1)
        off = cov - np.diag(np.diag(cov))
        worst_off = max(worst_off, float(np.abs(off).max()))
        worst_diag = max(worst_diag, float(np.abs(np.diag(cov) - 1.0).max()))
    passed = worst_off < 1e-4 and worst_diag < 1e-3
    return CheckResult("whitening-identity", passed, f"off-diag {worst_off:.3e}, diag drift {worst_diag:.3e}")


def check_coloring(seed: int) -> CheckResult:
    """Recoloring must reproduce the style covariance within 1e-3 (rel Frobenius)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in (4, 8, 32):
        n = 64 * c
        content = FeatureMap(rng.standard_normal((c, 1, n)).astype(np.float32))
        mixing = rng.standard_normal((c, c))
        style = FeatureMap((mixing @ rng.standard_normal((c, n))).astype(np.float32).reshape(c, 1, n))
        out = stylize.wct(content, style).data.reshape(c, -1).astype(np.float64)
        out_cov = np.cov(out, ddof=1)
        style_cov = stylize.compute_stats(style).covariance
        rel = float(np.linalg.norm(out_cov - style_cov) / np.linalg.norm(style_cov))
        worst = max(worst, rel)
    return CheckResult("coloring-covariance", worst < 1e-3, f"max relative Frobenius gap {worst:.3e}")


def check_adain(seed: int) -> CheckResult:
    """AdaIN output channel moments must match the style within 1e-5."""
    rng = np.random.default_rng(seed)
    c, n = 16, 2048
    content = FeatureMap(rng.standard_normal((c, 1, n)).astype(np.float32))
    style = FeatureMap((rng.standard_normal((c, n)) * 1.7 + 0.4).astype(np.float32).reshape(c, 1, n))
    out = stylize.adain(content, style).data.reshape(c, -1).astype(np.float64)
    sty = style.data.reshape(c, -1).astype(np.float64)
    mean_gap = float(np.abs(out.mean(axis=1) - sty.mean(axis=1)).max())
    std_gap = float(np.abs(out.std(axis=1) - sty.std(axis=1)).max())
    passed = mean_gap < 1e-5 and std_gap < 1e-5
    return CheckResult("adain-moments", passed, f"mean gap {mean_gap:.3e}, std gap {std_gap:.3e}")


def naive_conv2d(data: np.ndarray, weight: np.ndarray, bias: np.ndarray, reflect: bool) -> np.ndarray:
    """Direct quadruple-loop cross-correlation (pad 1), float64 accumulate, float32 store."""
    cin, h, w = data.shape
    cout = weight.shape[0]
    out = np.zeros((cout, h, w), dtype=np.float32)

    def at(c: int, i: int, j: int) -> float:
        if reflect:
            if i < 0:
                i = -i
            elif i >= h:
                i = 2 * h - 2 - i
            if j < 0:
                j = -j
            elif j >= w:
                j = 2 * w - 2 - j
            return float(data[c, i, j])
        if i < 0 or j < 0 or i >= h or j >= w:
            return 0.0
        return float(data[c, i, j])

    for o in range(cout):
        for y in range(h):
            for x in range(w):
                acc = float(bias[o])
                for c in range(cin):
                    for ky in range(3):
                        for kx in range(3):
                            acc += float(weight[o, c, ky, kx]) * at(c, y + ky - 1, x + kx - 1)
                out[o, y, x] = np.float32(acc)
    return out


def check_conv_oracle(seed: int, count: int = 50) -> CheckResult:
    """Optimized conv2d must match the naive definition within 1e-6."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for index in range(count):
        cin = int(rng.integers(1, 9))
        cout = int(rng.integers(1, 9))
        h = int(rng.integers(3, 17))
        w = int(rng.integers(3, 17))
        data = rng.standard_normal((cin, h, w)).astype(np.float32)
        weight = rng.standard_normal((cout, cin, 3, 3)).astype(np.float32)
        bias = rng.standard_normal(cout).astype(np.float32)
        reflect = index % 2 == 0
        mode = PaddingMode.REFLECT if reflect else PaddingMode.ZERO
        fast = conv2d(FeatureMap(data), ConvLayer(weight=weight, bias=bias), padding=mode).data
        slow = naive_conv2d(data, weight, bias, reflect)
        worst = max(worst, float(np.abs(fast.astype(np.float64) - slow.astype(np.float64)).max()))
    return CheckResult("conv-oracle", worst < 1e-6, f"max |fast - naive| {worst:.3e} over {count} instances")


def check_parameter_ratio(seed: int) -> CheckResult:
    """Concat/sum decoder parameter ratio must land in the nominal 1.80 band."""
    concat = build_model(synthetic_weights(seed, "concat"), decoder_mode="concat")
    summed = build_model(synthetic_weights(seed, "sum"), decoder_mode="sum")
    ratio = concat.decoder_parameters / summed.decoder_parameters
    lo, hi = PARAMETER_RATIO_BAND
    return CheckResult(
        "parameter-ratio",
        lo <= ratio <= hi,
        f"concat {concat.decoder_parameters} / sum {summed.decoder_parameters} = {ratio:.4f}, band [{lo}, {hi}]",
    )


def check_pooling_roundtrip(seed: int) -> CheckResult:
    """With convs bypassed, haar round-trip is exact while max round-trip is lossy."""
    rng = np.random.default_rng(seed)
    image = FeatureMap(rng.uniform(0.0, 1.0, size=(3, 32, 32)).astype(np.float32))
    haar_err = float(
        np.abs(reconstruct(build_plumbing_model(pooling="haar"), image).data - image.data).max()
    )
    max_err = float(
        np.abs(reconstruct(build_plumbing_model(pooling="max"), image).data - image.data).max()
    )
    passed = haar_err < 1e-5 and max_err > 0.0
    return CheckResult(
        "pooling-roundtrip-order", passed, f"haar error {haar_err:.3e}, max-pool error {max_err:.3e}"
    )


ALL_CHECKS = (
    check_kernel_orthonormality,
    check_tight_frame,
    check_parseval,
    check_linearity,
    check_whitening,
    check_coloring,
    check_adain,
    check_conv_oracle,
    check_parameter_ratio,
    check_pooling_roundtrip,
)

_HAAR_SENSITIVE = {
    "check_kernel_orthonormality",
    "check_tight_frame",
    "check_parseval",
    "check_linearity",
}


def run_all(seed: int = 42, perturb_haar: float = 0.0) -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        if check.__name__ in _HAAR_SENSITIVE:
            results.append(check(seed, perturb_haar=perturb_haar))
        else:
            results.append(check(seed))
    return results


def format_table(results: list[CheckResult]) -> str:
    lines = []
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        lines.append(f"{result.name:<26} {status:<4} {result.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
