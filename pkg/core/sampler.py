"""
Sampler - Range-null-space restoration sampler and baselines
Noise-aware restoration, its noiseless form, plain ancestral sampling and the
replace-the-known-part baseline

Each non-terminal step t = T..2 computes the x0 estimate, corrects its range
space toward the observation with strength lambda_t, then draws z_{t-1} from
the single-step posterior. Observed coordinates receive variance gamma_t; under
the range noise budget the null space keeps the schedule variance sigma_t^2.
The terminal step returns the corrected x0 estimate at t = 1 without further
noise, reusing lambda_2 unless the exact terminal correction is requested.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from .channel import Observation
from .denoiser.base_denoiser import BaseDenoiser, Condition
from .errors import ContractError, InvariantViolation, SamplerDivergenceError
from .linop import combine_solution
from .schedule import NoiseSchedule, forward_marginal, posterior_params

GAMMA_TOLERANCE = 1e-12


class LambdaMode(Enum):
    SIGMA_RATIO = "sigma_ratio"
    EXACT_ZERO_GAMMA = "exact_zero_gamma"


class NoiseBudget(Enum):
    RANGE = "range"  # gamma_t on the range space, sigma_t^2 on the null space
    ISOTROPIC = "isotropic"  # gamma_t everywhere


class RestorationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    guidance_scale: float = Field(3.0, ge=0.0)
    sigma_y: float = Field(0.0, ge=0.0)
    lambda_mode: LambdaMode = LambdaMode.SIGMA_RATIO
    noise_budget: NoiseBudget = NoiseBudget.RANGE
    exact_terminal: bool = False  # full range correction at t = 1 for noise-free latents
    seed: Optional[int] = None
    verbose: bool = False


@dataclass
class RestorationResult:
    z0_hat: np.ndarray
    lambdas: np.ndarray  # indexed by step, NaN where unused
    gammas: np.ndarray
    residuals: np.ndarray  # max |A z0_hat - y| over observed coordinates
    steps: int = 0  # denoiser steps taken


def lambda_gamma(s: NoiseSchedule, t: int, sigma_y: float,
                 mode: LambdaMode = LambdaMode.SIGMA_RATIO) -> Tuple[float, float]:
    """
    Correction strength and injected-noise variance for step t.

    The pair always satisfies (c_t lambda sigma_y)^2 + gamma = sigma_t^2, so
    the channel noise carried in through the correction plus the fresh noise
    matches the posterior variance.
    """
    if not 2 <= t <= s.steps:
        raise ContractError(f"lambda_gamma needs 2 <= t <= {s.steps}, got t={t}")
    if sigma_y < 0:
        raise ContractError("sigma_y must be non-negative")

    variance = s.posterior_variances[t]
    sigma = s.posterior_sigmas[t]
    c = s.coef_z0[t]

    if sigma_y == 0.0 or sigma >= c * sigma_y:
        lam = 1.0
        gamma = variance - (c * sigma_y) ** 2
    elif mode is LambdaMode.SIGMA_RATIO:
        lam = float(sigma / sigma_y)
        gamma = variance - (c * lam * sigma_y) ** 2
    else:
        lam = float(sigma / (c * sigma_y))
        gamma = 0.0

    if gamma < -GAMMA_TOLERANCE:
        raise InvariantViolation(f"negative noise variance {gamma} at t={t}")
    return lam, max(gamma, 0.0)


def _shape(model: BaseDenoiser, batch: Optional[int]) -> Tuple[int, ...]:
    return (model.dim,) if batch is None else (batch, model.dim)


def _check_finite(z: np.ndarray, t: int):
    if not np.all(np.isfinite(z)):
        raise SamplerDivergenceError(step=t)


def _run_correction_chain(model: BaseDenoiser, s: NoiseSchedule, obs: Observation,
                          cond: Optional[Condition], guidance_scale: float,
                          rng: np.random.Generator, batch: Optional[int],
                          step_rule: Callable[[int], Tuple[float, float, float]],
                          exact_terminal: bool, verbose: bool) -> RestorationResult:
    A, y = obs.operator, obs.y
    observed = A.observed_mask()
    lambdas = np.full(s.steps + 1, np.nan)
    gammas = np.full(s.steps + 1, np.nan)
    residuals = np.full(s.steps + 1, np.nan)

    def corrected(z_t, t, lam):
        z0t = model.estimate_z0(z_t, t, cond, guidance_scale)
        x_hat = z0t - lam * A.pinv_apply(A.apply(z0t) - y)
        residuals[t] = float(np.max(np.abs((A.apply(x_hat) - y)[..., observed]), initial=0.0))
        return x_hat

    z = rng.standard_normal(_shape(model, batch))
    for t in tqdm(range(s.steps, 1, -1), desc="restore", disable=not verbose):
        lam, gamma, null_variance = step_rule(t)
        x_hat = corrected(z, t, lam)
        mean, _ = posterior_params(s, z, x_hat, t)
        noise = rng.standard_normal(z.shape)
        range_noise = A.range_project(noise)
        z = mean + np.sqrt(gamma) * range_noise + np.sqrt(null_variance) * (noise - range_noise)
        _check_finite(z, t)
        lambdas[t] = lam
        gammas[t] = gamma

    # t = 1 takes the full correction only when asked, otherwise the last non-terminal strength
    lambdas[1] = 1.0 if exact_terminal else lambdas[2]
    gammas[1] = 0.0
    z0_hat = corrected(z, 1, lambdas[1])
    _check_finite(z0_hat, 1)
    return RestorationResult(z0_hat=z0_hat, lambdas=lambdas, gammas=gammas, residuals=residuals,
                             steps=s.steps)


def restore(model: BaseDenoiser, s: NoiseSchedule, obs: Observation, cond: Optional[Condition],
            cfg: RestorationConfig, rng: Optional[np.random.Generator] = None,
            batch: Optional[int] = None) -> RestorationResult:
    """
    Noise-aware range-null-space restoration.

    The channel-noise budget of ``lambda_gamma`` shapes the injected noise on
    observed coordinates; under ``NoiseBudget.RANGE`` the null space keeps the
    schedule's posterior variance. With ``cfg.sigma_y == 0`` this is
    bit-identical to ``restore_noiseless`` for the same generator state.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)

    def step_rule(t):
        lam, gamma = lambda_gamma(s, t, cfg.sigma_y, cfg.lambda_mode)
        if cfg.noise_budget is NoiseBudget.ISOTROPIC:
            return lam, gamma, gamma
        return lam, gamma, s.posterior_variances[t]

    return _run_correction_chain(model, s, obs, cond, cfg.guidance_scale, rng, batch,
                                 step_rule, cfg.exact_terminal, cfg.verbose)


def restore_noiseless(model: BaseDenoiser, s: NoiseSchedule, obs: Observation,
                      cond: Optional[Condition], cfg: RestorationConfig,
                      rng: Optional[np.random.Generator] = None,
                      batch: Optional[int] = None) -> RestorationResult:
    """Full range replacement at every step with the schedule's own posterior noise"""
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)

    def step_rule(t):
        variance = s.posterior_variances[t]
        return 1.0, variance, variance

    return _run_correction_chain(model, s, obs, cond, cfg.guidance_scale, rng, batch,
                                 step_rule, True, cfg.verbose)


def ancestral_sample(model: BaseDenoiser, s: NoiseSchedule, cond: Optional[Condition],
                     guidance_scale: float, rng: np.random.Generator,
                     batch: Optional[int] = None) -> np.ndarray:
    """Unconstrained guided sampling from the model"""
    z = rng.standard_normal(_shape(model, batch))
    for t in range(s.steps, 1, -1):
        z0t = model.estimate_z0(z, t, cond, guidance_scale)
        mean, variance = posterior_params(s, z, z0t, t)
        z = mean + np.sqrt(variance) * rng.standard_normal(z.shape)
        _check_finite(z, t)
    return model.estimate_z0(z, 1, cond, guidance_scale)


def replace_baseline(model: BaseDenoiser, s: NoiseSchedule, obs: Observation,
                     cond: Optional[Condition], cfg: RestorationConfig,
                     rng: Optional[np.random.Generator] = None,
                     batch: Optional[int] = None) -> RestorationResult:
    """
    Paste a forward-noised copy of the observation into the range space at
    every step, generating only the null space; the final estimate takes the
    observation's range part verbatim.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    A, y = obs.operator, obs.y
    observed = A.observed_mask()
    known = A.pinv_apply(y)
    nan = np.full(s.steps + 1, np.nan)
    residuals = nan.copy()
    known_rng = rng.spawn(1)[0]

    z = rng.standard_normal(_shape(model, batch))
    steps = tqdm(range(s.steps, 1, -1), desc="replace", disable=not cfg.verbose)
    for t in steps:
        z0t = model.estimate_z0(z, t, cond, cfg.guidance_scale)
        mean, variance = posterior_params(s, z, z0t, t)
        generated = mean + np.sqrt(variance) * rng.standard_normal(z.shape)
        noised_known = forward_marginal(s, np.broadcast_to(known, z.shape), t - 1,
                                        known_rng.standard_normal(z.shape))
        z = A.range_project(noised_known) + (generated - A.range_project(generated))
        _check_finite(z, t)
        residuals[t] = float(np.max(np.abs((A.apply(z0t) - y)[..., observed]), initial=0.0))

    z0_hat = combine_solution(A, y, model.estimate_z0(z, 1, cond, cfg.guidance_scale))
    _check_finite(z0_hat, 1)
    residuals[1] = float(np.max(np.abs((A.apply(z0_hat) - y)[..., observed]), initial=0.0))
    return RestorationResult(z0_hat=z0_hat, lambdas=nan.copy(), gammas=nan.copy(),
                             residuals=residuals, steps=s.steps)
