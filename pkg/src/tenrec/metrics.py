"""Recovery quality metrics: PSNR, single-scale SSIM, ERGAS.

N-way inputs are scored per frontal slice of the first two modes and the
per-slice values are averaged, so a hyperspectral cube is treated as a
stack of bands.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _as_bands(x, ref):
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if x.shape != ref.shape:
        raise ValueError(f"shapes differ: {x.shape} vs {ref.shape}")
    if x.ndim < 2:
        raise ValueError("metrics need at least a 2-way array")
    return x.reshape(x.shape[0], x.shape[1], -1), ref.reshape(x.shape[0], x.shape[1], -1)


def psnr(x, ref, peak=1.0):
    """Mean over bands of 10*log10(peak^2 / MSE).

    A band with zero error contributes +inf, which propagates to the
    mean, so the sentinel +inf signals an exact match.
    """
    xb, rb = _as_bands(x, ref)
    values = []
    for b in range(xb.shape[2]):
        mse = float(np.mean((xb[:, :, b] - rb[:, :, b]) ** 2))
        if mse == 0.0:
            return float("inf")
        values.append(10.0 * np.log10(peak**2 / mse))
    return float(np.mean(values))


def _gaussian_window(size, sigma):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _ssim_band(x, ref, peak):
    size = min(SSIM_WINDOW, x.shape[0], x.shape[1])
    if size % 2 == 0:
        size -= 1
    window = _gaussian_window(size, SSIM_SIGMA)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    mu1 = convolve2d(x, window, mode="valid")
    mu2 = convolve2d(ref, window, mode="valid")
    s11 = convolve2d(x * x, window, mode="valid") - mu1**2
    s22 = convolve2d(ref * ref, window, mode="valid") - mu2**2
    s12 = convolve2d(x * ref, window, mode="valid") - mu1 * mu2
    num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
    den = (mu1**2 + mu2**2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def ssim(x, ref, peak=1.0):
    """Mean over bands of the single-scale structural similarity index."""
    xb, rb = _as_bands(x, ref)
    return float(np.mean([_ssim_band(xb[:, :, b], rb[:, :, b], peak) for b in range(xb.shape[2])]))


def ergas(x, ref, ratio=1.0):
    """Band-relative global RMSE error; zero only for a perfect match.

    ``100/ratio * sqrt(mean_b((RMSE_b / mean_b)^2))`` where ``mean_b`` is
    the reference band mean.  Not symmetric in its arguments.
    """
    xb, rb = _as_bands(x, ref)
    terms = []
    for b in range(xb.shape[2]):
        band_mean = float(np.mean(rb[:, :, b]))
        if band_mean == 0.0:
            raise ValueError(f"reference band {b} has zero mean; ERGAS undefined")
        rmse = float(np.sqrt(np.mean((xb[:, :, b] - rb[:, :, b]) ** 2)))
        terms.append((rmse / band_mean) ** 2)
    return float(100.0 / ratio * np.sqrt(np.mean(terms)))


def evaluate_all(x, ref, peak=1.0, ratio=1.0):
    """psnr/ssim/ergas of ``x`` against a reference, as a dict."""
    return {
        "psnr": psnr(x, ref, peak=peak),
        "ssim": ssim(x, ref, peak=peak),
        "ergas": ergas(x, ref, ratio=ratio),
    }
