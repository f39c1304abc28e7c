"""Full-reference image quality metrics between original and de-identified frames.

Six metrics are computed per frame pair: MSE, RMSE, PSNR, UIQI, ERGAS and SAM.
All of them operate on 8-bit samples treated as reals in [0, 255]; identical
inputs yield (0, 0, inf, 1, 0, 0) exactly.  Window and per-pixel sums are
accumulated through integral images, which are exact in float64 for 8-bit
inputs, so results do not depend on traversal order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AllBandsDegenerate, DegenerateBandWarning, ShapeMismatch, TooSmall

PEAK = 255.0
UIQI_WINDOW = 8
SAM_EPS = 1e-6
ERGAS_EPS = 1e-6


@dataclass(frozen=True)
class MetricDescriptor:
    """Name, similarity direction, and identical-pair value of one metric."""

    name: str
    orientation: str  # "lower_is_similar" | "higher_is_similar"
    identical_value: float


METRIC_DESCRIPTORS = {
    "mse": MetricDescriptor("mse", "lower_is_similar", 0.0),
    "rmse": MetricDescriptor("rmse", "lower_is_similar", 0.0),
    "psnr": MetricDescriptor("psnr", "higher_is_similar", math.inf),
    "uiqi": MetricDescriptor("uiqi", "higher_is_similar", 1.0),
    "ergas": MetricDescriptor("ergas", "lower_is_similar", 0.0),
    "sam": MetricDescriptor("sam", "lower_is_similar", 0.0),
}


@dataclass(frozen=True)
class QualityMetrics:
    """All six quality metrics for one original/de-identified pair."""

    mse: float
    rmse: float
    psnr_db: float  # math.inf when mse == 0
    uiqi: float
    ergas: float
    sam: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "psnr": self.psnr_db,
            "uiqi": self.uiqi,
            "ergas": self.ergas,
            "sam": self.sam,
        }


def _check_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeMismatch(f"image shapes differ: {x.shape} vs {y.shape}")
    if x.ndim not in (2, 3):
        raise ShapeMismatch(f"expected 2-D or 3-D image arrays, got {x.ndim}-D")
    return x.astype(np.float64, copy=False), y.astype(np.float64, copy=False)


def _channels(a: np.ndarray) -> np.ndarray:
    """View as (H, W, C); grayscale becomes a single channel."""
    return a[:, :, np.newaxis] if a.ndim == 2 else a


def mse(x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared error pooled over all pixels and channels."""
    xf, yf = _check_pair(x, y)
    d = xf - yf
    return float(np.mean(d * d))


def rmse(x: np.ndarray, y: np.ndarray) -> float:
    return math.sqrt(mse(x, y))


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB against an 8-bit peak of 255.

    Returns ``math.inf`` for identical inputs.
    """
    err = mse(x, y)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def _window_sums(a: np.ndarray, w: int) -> np.ndarray:
    """Sliding w-by-w window sums at stride 1 via an integral image."""
    h, wd = a.shape
    c = np.zeros((h + 1, wd + 1), dtype=np.float64)
    c[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    return c[w:, w:] - c[:-w, w:] - c[w:, :-w] + c[:-w, :-w]


def _uiqi_channel(x: np.ndarray, y: np.ndarray, w: int) -> float:
    n = float(w * w)
    sx = _window_sums(x, w)
    sy = _window_sums(y, w)
    sxx = _window_sums(x * x, w)
    syy = _window_sums(y * y, w)
    sxy = _window_sums(x * y, w)
    d = x - y
    sdd = _window_sums(d * d, w)

    mx = sx / n
    my = sy / n
    vx = sxx / n - mx * mx
    vy = syy / n - my * my
    cxy = sxy / n - mx * my
    var_term = vx + vy
    mean_term = mx * mx + my * my

    with np.errstate(divide="ignore", invalid="ignore"):
        q = (4.0 * cxy * mx * my) / (var_term * mean_term)
    # Degenerate windows: a zero denominator factor gives 0 unless the two
    # windows are literally equal, which counts as perfect similarity.
    q = np.where((var_term <= 0.0) | (mean_term <= 0.0), 0.0, q)
    q = np.where(sdd == 0.0, 1.0, q)
    return float(np.mean(np.clip(q, -1.0, 1.0)))


def uiqi(x: np.ndarray, y: np.ndarray, window: int = UIQI_WINDOW) -> float:
    """Universal image quality index, mean over sliding windows and channels."""
    xf, yf = _check_pair(x, y)
    xc, yc = _channels(xf), _channels(yf)
    h, wd, nch = xc.shape
    if h < window or wd < window:
        raise TooSmall(f"image {h}x{wd} smaller than {window}x{window} window")
    return float(np.mean([_uiqi_channel(xc[:, :, c], yc[:, :, c], window) for c in range(nch)]))


def sam(x: np.ndarray, y: np.ndarray, eps: float = SAM_EPS) -> float:
    """Mean spectral angle (radians) between per-pixel channel vectors.

    Pixels where either vector norm falls below ``eps`` are skipped;
    an all-degenerate pair reports 0.
    """
    xf, yf = _check_pair(x, y)
    xv = _channels(xf).reshape(-1, _channels(xf).shape[2])
    yv = _channels(yf).reshape(-1, _channels(yf).shape[2])
    sx2 = np.sum(xv * xv, axis=1)
    sy2 = np.sum(yv * yv, axis=1)
    dot = np.sum(xv * yv, axis=1)
    valid = (sx2 >= eps * eps) & (sy2 >= eps * eps)
    if not np.any(valid):
        return 0.0
    # sqrt of the product (not product of sqrts) keeps cos(angle) exactly 1
    # for identical vectors, so identical images map to exactly 0.
    cosang = dot[valid] / np.sqrt(sx2[valid] * sy2[valid])
    return float(np.mean(np.arccos(np.clip(cosang, -1.0, 1.0))))


def ergas(x: np.ndarray, y: np.ndarray, ratio: float = 1.0, eps: float = ERGAS_EPS) -> float:
    """Relative dimensionless global error, reference-normalized on ``x``.

    Bands whose reference mean is below ``eps`` are excluded with a warning;
    the remaining bands are averaged.  ``ratio`` is the resolution ratio,
    1 for same-resolution pairs.
    """
    xf, yf = _check_pair(x, y)
    xc, yc = _channels(xf), _channels(yf)
    nch = xc.shape[2]
    terms = []
    for c in range(nch):
        mu = float(np.mean(xc[:, :, c]))
        if mu < eps:
            warnings.warn(
                f"band {c} excluded from ERGAS: reference mean {mu:g} below {eps:g}",
                DegenerateBandWarning,
                stacklevel=2,
            )
            continue
        d = xc[:, :, c] - yc[:, :, c]
        band_rmse = math.sqrt(float(np.mean(d * d)))
        terms.append((band_rmse / mu) ** 2)
    if not terms:
        raise AllBandsDegenerate("every reference band mean is below eps")
    return 100.0 * ratio * math.sqrt(sum(terms) / len(terms))


def frame_quality(x: np.ndarray, y: np.ndarray, ergas_ratio: float = 1.0) -> QualityMetrics:
    """All six metrics for one pair; fields match the individual functions."""
    _check_pair(x, y)
    m = mse(x, y)
    return QualityMetrics(
        mse=m,
        rmse=math.sqrt(m),
        psnr_db=math.inf if m == 0.0 else 10.0 * math.log10(PEAK * PEAK / m),
        uiqi=uiqi(x, y),
        ergas=ergas(x, y, ratio=ergas_ratio),
        sam=sam(x, y),
    )
