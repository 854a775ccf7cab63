"""
Schedule - Discrete linear-beta noise schedule
Forward marginals, single-step posteriors and x0 estimates for a T-step chain

All per-step arrays carry a leading boundary entry so they are indexed by the
step number directly: ``alpha_bars[0] == 1`` and ``betas[0] == 0``; the chain
itself lives on t = 1..T.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, ContractError, ShapeError


@dataclass(frozen=True)
class NoiseSchedule:
    """Precomputed tables for a T-step diffusion chain"""

    steps: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    posterior_variances: np.ndarray
    posterior_sigmas: np.ndarray
    coef_z0: np.ndarray  # c_t, weight of the x0 estimate in the posterior mean
    coef_zt: np.ndarray  # weight of z_t in the posterior mean

    def __post_init__(self):
        for name in ("betas", "alphas", "alpha_bars", "posterior_variances",
                     "posterior_sigmas", "coef_z0", "coef_zt"):
            table = getattr(self, name)
            if table.shape != (self.steps + 1,):
                raise ConfigurationError(f"{name} must have length T+1={self.steps + 1}")
            table.setflags(write=False)

        chain = self.betas[1:]
        if np.any(np.diff(chain) <= 0):
            raise ConfigurationError("betas must be strictly increasing")
        if chain[0] <= 0 or chain[-1] >= 1:
            raise ConfigurationError("betas must lie in (0, 1)")
        if np.any(np.diff(self.alpha_bars) >= 0):
            raise ConfigurationError("alpha_bar must be strictly decreasing")
        if self.posterior_variances[1] != 0.0:
            raise ConfigurationError("posterior variance at t=1 must be exactly 0")


def build_linear_schedule(steps: int, beta_start: float = 1e-4,
                          beta_end: float = 2e-2) -> NoiseSchedule:
    """
    Build the linear-beta schedule.

    Args:
        steps: Number of chain steps T (>= 2)
        beta_start: beta_1
        beta_end: beta_T

    Returns:
        NoiseSchedule with every table precomputed in float64
    """
    if steps < 2:
        raise ConfigurationError(f"schedule needs at least 2 steps, got {steps}")
    if not 0 < beta_start < beta_end < 1:
        raise ConfigurationError(
            f"need 0 < beta_start < beta_end < 1, got {beta_start}, {beta_end}")

    betas = np.concatenate([[0.0], np.linspace(beta_start, beta_end, steps, dtype=np.float64)])
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    prev = np.concatenate([[1.0], alpha_bars[:-1]])

    denom = np.ones_like(alpha_bars)
    denom[1:] = 1.0 - alpha_bars[1:]
    posterior_variances = np.zeros_like(betas)
    posterior_variances[1:] = betas[1:] * (1.0 - prev[1:]) / denom[1:]
    coef_z0 = np.zeros_like(betas)
    coef_z0[1:] = np.sqrt(prev[1:]) * betas[1:] / denom[1:]
    coef_zt = np.zeros_like(betas)
    coef_zt[1:] = np.sqrt(alphas[1:]) * (1.0 - prev[1:]) / denom[1:]

    return NoiseSchedule(
        steps=steps,
        betas=betas,
        alphas=alphas,
        alpha_bars=alpha_bars,
        posterior_variances=posterior_variances,
        posterior_sigmas=np.sqrt(posterior_variances),
        coef_z0=coef_z0,
        coef_zt=coef_zt,
    )


def build_schedule(family: str, steps: int, beta_start: float, beta_end: float) -> NoiseSchedule:
    if family != "linear":
        raise ConfigurationError(f"unknown schedule family '{family}'")
    return build_linear_schedule(steps, beta_start, beta_end)


def _check_step(s: NoiseSchedule, t: int, lowest: int = 1):
    if not lowest <= t <= s.steps:
        raise ContractError(f"step t={t} outside [{lowest}, {s.steps}]")


def forward_marginal(s: NoiseSchedule, z0: np.ndarray, t: int, eps: np.ndarray) -> np.ndarray:
    """Sample z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps"""
    _check_step(s, t)
    if np.shape(z0) != np.shape(eps):
        raise ShapeError(f"z0 shape {np.shape(z0)} != eps shape {np.shape(eps)}")
    abar = s.alpha_bars[t]
    return np.sqrt(abar) * z0 + np.sqrt(1.0 - abar) * eps


def posterior_params(s: NoiseSchedule, z_t: np.ndarray, z0_hat: np.ndarray,
                     t: int) -> Tuple[np.ndarray, float]:
    """Mean and variance of q(z_{t-1} | z_t, z0_hat) for t >= 2"""
    _check_step(s, t, lowest=2)
    if np.shape(z_t) != np.shape(z0_hat):
        raise ShapeError(f"z_t shape {np.shape(z_t)} != z0_hat shape {np.shape(z0_hat)}")
    mean = s.coef_z0[t] * z0_hat + s.coef_zt[t] * z_t
    return mean, float(s.posterior_variances[t])


def estimate_z0(s: NoiseSchedule, z_t: np.ndarray, eps_hat: np.ndarray, t: int) -> np.ndarray:
    """Invert the forward marginal given a noise prediction"""
    _check_step(s, t)
    if np.shape(z_t) != np.shape(eps_hat):
        raise ShapeError(f"z_t shape {np.shape(z_t)} != eps_hat shape {np.shape(eps_hat)}")
    abar = s.alpha_bars[t]
    return (z_t - np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(abar)


def noise_from_z0(s: NoiseSchedule, z_t: np.ndarray, z0_hat: np.ndarray, t: int) -> np.ndarray:
    """Noise prediction consistent with an x0 estimate (inverse of estimate_z0)"""
    _check_step(s, t)
    abar = s.alpha_bars[t]
    return (z_t - np.sqrt(abar) * z0_hat) / np.sqrt(1.0 - abar)
