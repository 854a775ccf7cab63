"""
Channel - PSNR-calibrated AWGN channel with optional erasure
Also hosts the receiver-side noise-level estimators used to pick sigma*_y
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.stats import median_abs_deviation

from .errors import ConfigurationError, ContractError, EstimationError
from .linop import DegradationOperator, IdentityOperator, contiguous_mask

MIN_ESTIMATION_LENGTH = 16
# Gaussian consistency constant for the median absolute deviation
MAD_TO_STD = 0.6745


class NoiseKnowledge(Enum):
    KNOWN_SIGMA = "known_sigma"
    ADAPTIVE_RANGE = "adaptive_range"
    MANUAL = "manual"


class SigmaSource(Enum):
    LATENT = "latent"
    CONDITION = "condition"


def parse_psnr(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        value = float(value)
    value = float(value)
    if math.isnan(value) or value == -math.inf:
        raise ValueError(f"PSNR must be finite or +inf, got {value}")
    return value


class ErasureSpec(BaseModel):
    """Erased window as fractions of the latent time (frame) axis"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    start_fraction: float
    length_fraction: float

    @model_validator(mode="after")
    def _check_fractions(self):
        if not 0.0 <= self.start_fraction <= 1.0:
            raise ValueError("start_fraction must lie in [0, 1]")
        if not 0.0 < self.length_fraction <= 1.0:
            raise ValueError("length_fraction must lie in (0, 1]")
        if self.start_fraction + self.length_fraction > 1.0 + 1e-12:
            raise ValueError("erased window runs past the end of the clip")
        return self


class ChannelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    psnr_db: float
    erasure: Optional[ErasureSpec] = None
    noise_knowledge: NoiseKnowledge = NoiseKnowledge.ADAPTIVE_RANGE
    manual_sigma: Optional[float] = None
    frame_dim: int = 1
    latent_noise: bool = True  # False: erasure-only latent link, noisy condition

    @field_validator("psnr_db", mode="before")
    @classmethod
    def _parse_psnr(cls, value):
        return parse_psnr(value)

    @model_validator(mode="after")
    def _check_manual(self):
        if self.noise_knowledge is NoiseKnowledge.MANUAL:
            if self.manual_sigma is None or self.manual_sigma < 0:
                raise ValueError("manual noise knowledge needs a non-negative manual_sigma")
        if self.frame_dim < 1:
            raise ValueError("frame_dim must be positive")
        return self


@dataclass(frozen=True)
class Observation:
    y: np.ndarray
    operator: DegradationOperator
    condition_received: Optional[np.ndarray]
    sigma_y_true: Optional[float] = None
    condition_sigma_true: Optional[float] = None


def sigma_from_psnr(psnr_db: float, power: float) -> float:
    """Noise std for a signal of mean power ``power`` at the given PSNR"""
    if not power > 0:
        raise ConfigurationError(f"signal power must be positive, got {power}")
    if math.isinf(psnr_db):
        return 0.0
    return math.sqrt(power / 10.0 ** (psnr_db / 10.0))


def _awgn(x: np.ndarray, psnr_db: float, rng: np.random.Generator):
    sigma = sigma_from_psnr(psnr_db, float(np.mean(np.square(x))))
    return x + sigma * rng.standard_normal(x.shape), sigma


def transmit(z: np.ndarray, cond: Optional[np.ndarray], spec: ChannelSpec,
             rng: np.random.Generator) -> Observation:
    """
    Pass a latent (and its semantic embedding) through the channel.

    Erasure is applied first; noise then lands only on surviving coordinates.
    The noise std is calibrated against the mean power of the full latent.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise ContractError("transmit expects a single 1-D latent")
    dim = z.shape[0]
    power = float(np.mean(np.square(z)))
    if power == 0.0:
        raise ConfigurationError("cannot calibrate the channel on an all-zero latent")

    if spec.erasure is None:
        operator: DegradationOperator = IdentityOperator(dim)
    else:
        if dim % spec.frame_dim:
            raise ContractError(f"latent size {dim} is not a multiple of frame_dim {spec.frame_dim}")
        operator = contiguous_mask(dim // spec.frame_dim, spec.frame_dim,
                                   spec.erasure.start_fraction, spec.erasure.length_fraction)

    sigma = sigma_from_psnr(spec.psnr_db, power) if spec.latent_noise else 0.0
    noise = sigma * rng.standard_normal(dim) * operator.observed_mask()
    y = operator.apply(z) + noise

    cond_received = None
    cond_sigma = None
    if cond is not None:
        cond_received, cond_sigma = _awgn(np.asarray(cond, dtype=np.float64), spec.psnr_db, rng)

    known = spec.noise_knowledge is NoiseKnowledge.KNOWN_SIGMA
    return Observation(
        y=y,
        operator=operator,
        condition_received=cond_received,
        sigma_y_true=sigma if known else None,
        condition_sigma_true=cond_sigma if known else None,
    )


def estimate_noise_std(y: np.ndarray, kept: Optional[np.ndarray] = None, stride: int = 1) -> float:
    """
    Blind noise std from first differences: MAD(diff y) / (sqrt(2) * 0.6745).

    ``stride`` pairs each coordinate with the one ``stride`` places later; for
    a frame-major latent, stride = frame_dim differences each channel along
    time. With ``kept`` given, only pairs whose coordinates are both kept are
    used.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ContractError("estimate_noise_std expects a 1-D signal")
    if stride < 1:
        raise ContractError(f"stride must be positive, got {stride}")
    diffs = y[stride:] - y[:-stride]
    if kept is not None:
        kept = np.asarray(kept, dtype=bool)
        diffs = diffs[kept[stride:] & kept[:-stride]]
    if diffs.size < MIN_ESTIMATION_LENGTH - 1:
        raise EstimationError(
            f"need at least {MIN_ESTIMATION_LENGTH - 1} usable differences, got {diffs.size}")
    return float(median_abs_deviation(diffs) / (math.sqrt(2.0) * MAD_TO_STD))


def adaptive_sigma_y(y: np.ndarray, sigma: float) -> float:
    """Scale a per-sample std by the dynamic range of the observation"""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ContractError("adaptive_sigma_y needs a non-empty observation")
    if sigma < 0:
        raise ContractError("sigma must be non-negative")
    return float((np.max(y) - np.min(y)) * sigma)


def working_sigma(obs: Observation, spec: ChannelSpec,
                  source: SigmaSource = SigmaSource.LATENT) -> float:
    """Resolve the receiver's sigma*_y for the configured noise knowledge"""
    if spec.noise_knowledge is NoiseKnowledge.MANUAL:
        return float(spec.manual_sigma)

    if source is SigmaSource.CONDITION:
        if obs.condition_received is None:
            raise ContractError("condition-sourced sigma needs a received condition")
        signal = obs.condition_received
        kept = None
        stride = 1
        true_sigma = obs.condition_sigma_true
    else:
        # latent differences run along time, one channel at a time
        kept = obs.operator.observed_mask()
        signal = obs.y
        stride = spec.frame_dim
        true_sigma = obs.sigma_y_true

    visible = signal if kept is None else signal[kept]
    if spec.noise_knowledge is NoiseKnowledge.KNOWN_SIGMA:
        return adaptive_sigma_y(visible, true_sigma)
    return adaptive_sigma_y(visible, estimate_noise_std(signal, kept, stride))
