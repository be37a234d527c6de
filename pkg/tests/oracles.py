"""Independent reference implementations used as test oracles.

Everything here is written directly from the mathematical definitions with
plain loops and basic numpy, deliberately sharing no code with the package.
Where the package contract is float64 accumulation with float32 storage, the
oracles reproduce that contract so comparisons are meaningful at tight
tolerances.
"""

import numpy as np


def _mirror(i: int, n: int) -> int:
    if i < 0:
        return -i
    if i >= n:
        return 2 * n - 2 - i
    return i


def naive_conv2d(data: np.ndarray, weight: np.ndarray, bias: np.ndarray, reflect: bool) -> np.ndarray:
    """Quadruple-loop 3x3 cross-correlation with pad 1."""
    cin, h, w = data.shape
    cout = weight.shape[0]
    out = np.zeros((cout, h, w), dtype=np.float32)
    for o in range(cout):
        for y in range(h):
            for x in range(w):
                acc = float(bias[o])
                for c in range(cin):
                    for ky in range(3):
                        for kx in range(3):
                            i, j = y + ky - 1, x + kx - 1
                            if reflect:
                                value = float(data[c, _mirror(i, h), _mirror(j, w)])
                            elif 0 <= i < h and 0 <= j < w:
                                value = float(data[c, i, j])
                            else:
                                value = 0.0
                            acc += float(weight[o, c, ky, kx]) * value
                out[o, y, x] = np.float32(acc)
    return out


def naive_reflect_pad(data: np.ndarray, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    c, h, w = data.shape
    out = np.zeros((c, h + top + bottom, w + left + right), dtype=data.dtype)
    for ch in range(c):
        for i in range(out.shape[1]):
            for j in range(out.shape[2]):
                out[ch, i, j] = data[ch, _mirror(i - top, h), _mirror(j - left, w)]
    return out


def naive_pool(data: np.ndarray, kernels: np.ndarray) -> list[np.ndarray]:
    """Stride-2 valid correlation of each channel with each 2x2 kernel."""
    c, h, w = data.shape
    outs = []
    for kernel in kernels:
        out = np.zeros((c, h // 2, w // 2), dtype=np.float32)
        for ch in range(c):
            for i in range(h // 2):
                for j in range(w // 2):
                    acc = 0.0
                    for ky in range(2):
                        for kx in range(2):
                            acc += float(kernel[ky, kx]) * float(data[ch, 2 * i + ky, 2 * j + kx])
                    out[ch, i, j] = np.float32(acc)
        outs.append(out)
    return outs


def naive_unpool(bands: list[np.ndarray], kernels: np.ndarray) -> np.ndarray:
    """Sum of stride-2 transposed convolutions with the 2x2 kernels."""
    c, h, w = bands[0].shape
    out = np.zeros((c, 2 * h, 2 * w), dtype=np.float64)
    for band, kernel in zip(bands, kernels):
        for ch in range(c):
            for i in range(h):
                for j in range(w):
                    for ky in range(2):
                        for kx in range(2):
                            out[ch, 2 * i + ky, 2 * j + kx] += float(kernel[ky, kx]) * float(band[ch, i, j])
    return out.astype(np.float32)


def naive_covariance(columns: np.ndarray) -> np.ndarray:
    """Two-pass covariance of a (C, n) matrix with (n - 1) normalization."""
    c, n = columns.shape
    mean = np.array([sum(float(v) for v in columns[i]) / n for i in range(c)])
    cov = np.zeros((c, c))
    for i in range(c):
        for j in range(c):
            total = 0.0
            for k in range(n):
                total += (float(columns[i, k]) - mean[i]) * (float(columns[j, k]) - mean[j])
            cov[i, j] = total / (n - 1)
    return cov


def naive_sobel_edges(image: np.ndarray) -> np.ndarray:
    """Luma Sobel magnitude normalized by its peak; image is (3, H, W) in [0, 1]."""
    luma = 0.299 * image[0].astype(np.float64) + 0.587 * image[1].astype(np.float64) + 0.114 * image[2].astype(np.float64)
    h, w = luma.shape
    gx_k = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    gy_k = gx_k.T
    magnitude = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            gx = gy = 0.0
            for ky in range(3):
                for kx in range(3):
                    v = luma[_mirror(y + ky - 1, h), _mirror(x + kx - 1, w)]
                    gx += gx_k[ky, kx] * v
                    gy += gy_k[ky, kx] * v
            # float32 storage of each gradient plane, matching the contract
            gx = float(np.float32(gx))
            gy = float(np.float32(gy))
            magnitude[y, x] = np.sqrt(gx * gx + gy * gy)
    peak = magnitude.max()
    if peak > 0:
        magnitude = magnitude / peak
    return magnitude


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    g = np.array([np.exp(-((i - half) ** 2) / (2 * sigma**2)) for i in range(size)])
    window = np.outer(g, g)
    return window / window.sum()


def naive_ssim(x: np.ndarray, y: np.ndarray, size: int = 11, sigma: float = 1.5) -> float:
    """Sliding-window SSIM, one window at a time."""
    window = gaussian_window(size, sigma)
    c1, c2 = 0.01**2, 0.03**2
    h, w = x.shape
    values = []
    for i in range(h - size + 1):
        for j in range(w - size + 1):
            wx = x[i : i + size, j : j + size].astype(np.float64)
            wy = y[i : i + size, j : j + size].astype(np.float64)
            mu_x = float((window * wx).sum())
            mu_y = float((window * wy).sum())
            sxx = float((window * wx * wx).sum()) - mu_x**2
            syy = float((window * wy * wy).sum()) - mu_y**2
            sxy = float((window * wx * wy).sum()) - mu_x * mu_y
            values.append(
                ((2 * mu_x * mu_y + c1) * (2 * sxy + c2))
                / ((mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2))
            )
    return float(np.mean(values))


def naive_gram(features: np.ndarray) -> np.ndarray:
    """Centered second-moment matrix over pixel count for (C, n) features."""
    c, n = features.shape
    cols = features.astype(np.float64)
    mean = cols.mean(axis=1)
    centered = cols - mean[:, None]
    gram = np.zeros((c, c))
    for i in range(c):
        for j in range(c):
            gram[i, j] = float(np.dot(centered[i], centered[j])) / n
    return gram


def naive_encoder_forward(tensors: dict[str, np.ndarray], image: np.ndarray) -> np.ndarray:
    """Straight-line reimplementation of the encoder with Haar pooling.

    Returns the bottleneck feature. Layer storage is float32 after each step,
    matching the contract.
    """
    order = [
        "conv1_1",
        "conv1_2",
        "pool",
        "conv2_1",
        "conv2_2",
        "pool",
        "conv3_1",
        "conv3_2",
        "conv3_3",
        "conv3_4",
        "pool",
        "conv4_1",
    ]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    low = np.array([inv_sqrt2, inv_sqrt2])
    high = np.array([-inv_sqrt2, inv_sqrt2])
    ll = np.float32(np.outer(low, low))

    x = image.astype(np.float32)
    for step in order:
        if step == "pool":
            c, h, w = x.shape
            pooled = np.zeros((c, h // 2, w // 2), dtype=np.float32)
            for i in range(h // 2):
                for j in range(w // 2):
                    block = x[:, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2].astype(np.float32)
                    pooled[:, i, j] = (block * ll).sum(axis=(1, 2)).astype(np.float32)
            x = pooled
            continue
        weight = tensors[f"encoder.{step}.weight"]
        bias = tensors[f"encoder.{step}.bias"]
        cin, h, w = x.shape
        cout = weight.shape[0]
        out = np.zeros((cout, h, w), dtype=np.float32)
        w64 = weight.astype(np.float64)
        for y in range(h):
            for xx in range(w):
                window = np.empty((cin, 3, 3), dtype=np.float64)
                for ky in range(3):
                    for kx in range(3):
                        window[:, ky, kx] = x[:, _mirror(y + ky - 1, h), _mirror(xx + kx - 1, w)]
                out[:, y, xx] = (np.tensordot(w64, window, axes=([1, 2, 3], [0, 1, 2])) + bias).astype(
                    np.float32
                )
        x = np.maximum(out, 0.0).astype(np.float32)
    return x


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)
