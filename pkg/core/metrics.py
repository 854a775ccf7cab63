"""
Metrics - Signal-to-noise ratio and Frechet distance on latent features
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ContractError, ShapeError

SNR_CAP_DB = 120.0
PSD_TOLERANCE = 1e-10
NEGATIVE_DISTANCE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray
    count: int

    def __post_init__(self):
        if self.cov.shape != (self.mean.size, self.mean.size):
            raise ShapeError("covariance must be (k, k) for a k-dim mean")


def snr_db(reference: np.ndarray, estimate: np.ndarray) -> float:
    """10 log10(|ref|^2 / |ref - est|^2), capped at +120 dB for exact matches"""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise ShapeError(f"shapes differ: {reference.shape} vs {estimate.shape}")
    signal = float(np.sum(reference ** 2))
    error = float(np.sum((reference - estimate) ** 2))
    if signal == 0.0:
        raise ContractError("reference signal has zero energy")
    if error == 0.0:
        return SNR_CAP_DB
    return float(min(10.0 * np.log10(signal / error), SNR_CAP_DB))


def _clip_psd(cov: np.ndarray) -> np.ndarray:
    cov = (cov + cov.T) / 2
    values, vectors = np.linalg.eigh(cov)
    if values.min() >= 0.0:
        return cov
    return (vectors * np.clip(values, 0.0, None)) @ vectors.T


def fit_stats(features: np.ndarray) -> GaussianStats:
    """Sample mean and unbiased covariance of (n, k) feature rows, clipped to PSD"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError("features must be (n, k)")
    if features.shape[0] < 2:
        raise ContractError(f"need at least 2 feature rows, got {features.shape[0]}")
    cov = _clip_psd(np.atleast_2d(np.cov(features, rowvar=False, ddof=1)))
    return GaussianStats(mean=features.mean(axis=0), cov=cov, count=features.shape[0])


def _check_psd(cov: np.ndarray, name: str) -> Tuple[np.ndarray, np.ndarray]:
    if not np.allclose(cov, cov.T, rtol=0.0, atol=PSD_TOLERANCE):
        raise ContractError(f"{name} covariance is not symmetric")
    values, vectors = np.linalg.eigh((cov + cov.T) / 2)
    if values.min(initial=0.0) < -PSD_TOLERANCE:
        raise ContractError(f"{name} covariance is not positive semi-definite")
    return values, vectors


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """
    |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)

    The matrix square root comes from symmetric eigendecompositions, so the
    result is real. Round-off below zero is clamped; anything further below is
    an error.
    """
    if a.mean.shape != b.mean.shape:
        raise ShapeError("statistics have different feature sizes")
    values_a, vectors_a = _check_psd(a.cov, "first")
    _check_psd(b.cov, "second")

    root_a = (vectors_a * np.sqrt(np.clip(values_a, 0.0, None))) @ vectors_a.T
    middle = root_a @ b.cov @ root_a
    middle_values = np.linalg.eigvalsh((middle + middle.T) / 2)
    trace_root = float(np.sum(np.sqrt(np.clip(middle_values, 0.0, None))))

    diff = a.mean - b.mean
    distance = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * trace_root)
    if distance < -NEGATIVE_DISTANCE_TOLERANCE:
        raise ContractError(f"Frechet distance came out negative: {distance}")
    return max(distance, 0.0)


def region_features(signal: np.ndarray, region: Tuple[int, int], window: int) -> np.ndarray:
    """
    Frames [start, stop) of a frame-major latent as (n, window) feature rows.
    """
    signal = np.asarray(signal, dtype=np.float64).ravel()
    if window < 1 or signal.size % window:
        raise ShapeError(f"signal of size {signal.size} does not split into windows of {window}")
    frames = signal.reshape(-1, window)
    start, stop = region
    if not 0 <= start < stop <= frames.shape[0]:
        raise ContractError(f"region {region} is empty or outside [0, {frames.shape[0]}]")
    return frames[start:stop]
