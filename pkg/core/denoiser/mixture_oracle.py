"""
MixtureOracle - Closed-form posterior-mean denoiser for Gaussian mixture priors
Serves as an exact stand-in for a trained latent diffusion model

For a diagonal-covariance mixture, E[z0 | z_t] is computed in log space:
component responsibilities use N(z_t; sqrt(abar) mu_k, abar Sigma_k + (1 - abar) I)
and each component contributes its own linear-Gaussian posterior mean.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import hadamard
from scipy.special import logsumexp

from ..errors import ConfigurationError, EstimationError, ShapeError
from ..schedule import NoiseSchedule, noise_from_z0
from .base_denoiser import BaseDenoiser, Condition

WEIGHT_TOLERANCE = 1e-12
DEFAULT_TEMPERATURE = 0.5


@dataclass(frozen=True)
class GaussianMixturePrior:
    """Diagonal-covariance Gaussian mixture with optional semantic embeddings"""

    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, d)
    variances: np.ndarray  # (K, d), zero allowed for point masses
    embeddings: Optional[np.ndarray] = None  # (K, k)

    def __post_init__(self):
        if self.means.ndim != 2 or self.variances.shape != self.means.shape:
            raise ConfigurationError("means and variances must both be (K, d)")
        if self.weights.shape != (self.means.shape[0],):
            raise ConfigurationError("weights must have one entry per component")
        if np.any(self.weights < 0) or abs(float(self.weights.sum()) - 1.0) > WEIGHT_TOLERANCE:
            raise ConfigurationError("mixture weights must be non-negative and sum to 1")
        if np.any(self.variances < 0):
            raise ConfigurationError("component variances must be non-negative")
        if self.embeddings is not None and self.embeddings.shape[0] != self.means.shape[0]:
            raise ConfigurationError("need one embedding per component")

    @property
    def components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def embedding_dim(self) -> int:
        return 0 if self.embeddings is None else self.embeddings.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n latents and their component labels"""
        labels = rng.choice(self.components, size=n, p=self.weights)
        noise = rng.standard_normal((n, self.dim))
        return self.means[labels] + np.sqrt(self.variances[labels]) * noise, labels


def _walsh_rows(count: int) -> np.ndarray:
    """Rows 1..count of the smallest Sylvester Hadamard matrix with more than count rows"""
    order = 1
    while order <= count:
        order *= 2
    return hadamard(order)[1:count + 1].astype(np.float64)


def build_note_prior(dim: int, frame_dim: int = 4, components: int = 4,
                     within_variance: float = 0.01, embedding_dim: int = 64,
                     notes: int = 4) -> GaussianMixturePrior:
    """
    Equal-weight mixture over frame-major latents of ``dim // frame_dim`` frames.

    Every channel but the last is tonal: it holds ``notes`` constant levels of
    +-1 along time, and the pattern of levels identifies the component. The
    last channel is textured: zero mean and ``within_variance`` for every
    component, so it carries no class information. With ``frame_dim == 1``
    all coordinates are tonal.
    """
    if dim < 2 or components < 1 or notes < 1:
        raise ConfigurationError("prior needs dim >= 2, one component and one note")
    if frame_dim < 1 or dim % frame_dim:
        raise ConfigurationError(f"dim {dim} does not split into frames of {frame_dim}")
    if within_variance < 0:
        raise ConfigurationError("within_variance must be non-negative")

    n_frames = dim // frame_dim
    tonal = frame_dim - 1 if frame_dim > 1 else 1
    notes = min(notes, n_frames)
    rows = _walsh_rows(components)
    if tonal * notes < rows.shape[1]:
        raise ConfigurationError(
            f"{tonal * notes} held notes cannot tell {components} components apart")

    codes = rows[:, np.arange(tonal * notes) % rows.shape[1]].reshape(components, tonal, notes)
    note_of_frame = np.arange(n_frames) * notes // n_frames
    means = np.zeros((components, n_frames, frame_dim))
    means[:, :, :tonal] = codes[:, :, note_of_frame].transpose(0, 2, 1)
    variances = np.zeros_like(means)
    variances[:, :, tonal:] = within_variance

    return GaussianMixturePrior(
        weights=np.full(components, 1.0 / components),
        means=means.reshape(components, dim),
        variances=variances.reshape(components, dim),
        embeddings=block_embeddings(components, embedding_dim),
    )


def block_embeddings(components: int, embedding_dim: int) -> np.ndarray:
    """Distinct +-1 semantic codes, constant over equal blocks of the embedding index"""
    rows = _walsh_rows(components)
    blocks = rows.shape[1]
    if embedding_dim < blocks:
        raise ConfigurationError(f"{components} components need embedding_dim >= {blocks}")
    return rows[:, np.arange(embedding_dim) * blocks // embedding_dim]


def fit_mixture_prior(samples: np.ndarray, labels: np.ndarray,
                      embeddings: Optional[np.ndarray] = None,
                      variance_floor: float = 1e-6) -> GaussianMixturePrior:
    """Class-wise diagonal Gaussian fit of labelled latents"""
    samples = np.asarray(samples, dtype=np.float64)
    labels = np.asarray(labels)
    if samples.ndim != 2 or labels.shape != (samples.shape[0],):
        raise ShapeError("samples must be (n, d) with one label per row")
    classes = int(labels.max()) + 1
    means, variances, counts = [], [], []
    for k in range(classes):
        members = samples[labels == k]
        if members.shape[0] < 2:
            raise EstimationError(f"class {k} needs at least 2 samples, got {members.shape[0]}")
        means.append(members.mean(axis=0))
        variances.append(np.maximum(members.var(axis=0), variance_floor))
        counts.append(members.shape[0])
    counts = np.asarray(counts, dtype=np.float64)
    return GaussianMixturePrior(
        weights=counts / counts.sum(),
        means=np.stack(means),
        variances=np.stack(variances),
        embeddings=None if embeddings is None else np.asarray(embeddings, dtype=np.float64),
    )


def condition_log_weights(prior: GaussianMixturePrior, cond: Optional[Condition],
                          temperature: float = DEFAULT_TEMPERATURE,
                          hard: bool = False) -> np.ndarray:
    """Log component weights after conditioning on semantic side information"""
    with np.errstate(divide="ignore"):
        log_w = np.log(prior.weights)
        if cond is None or cond.is_null:
            return log_w
        if cond.component is not None:
            onehot = np.zeros(prior.components)
            onehot[int(cond.component)] = 1.0
            return np.log(onehot)

    if prior.embeddings is None:
        raise ConfigurationError("embedding condition given but the prior has no embeddings")
    emb = np.asarray(cond.embedding, dtype=np.float64)
    if emb.shape != (prior.embedding_dim,):
        raise ShapeError(f"condition embedding must have size {prior.embedding_dim}")
    dist2 = np.sum((prior.embeddings - emb) ** 2, axis=1)
    if hard:
        return condition_log_weights(prior, Condition(component=int(np.argmin(dist2))))
    return log_w - dist2 / (2.0 * temperature ** 2)


def mixture_posterior_mean(prior: GaussianMixturePrior, s: NoiseSchedule, z_t: np.ndarray,
                           t: int, cond: Optional[Condition] = None,
                           temperature: float = DEFAULT_TEMPERATURE,
                           hard: bool = False) -> np.ndarray:
    """E[z0 | z_t, cond] for the mixture prior, batched over leading axes"""
    z_t = np.asarray(z_t, dtype=np.float64)
    if z_t.shape[-1] != prior.dim:
        raise ShapeError(f"z_t last axis must be {prior.dim}, got {z_t.shape}")
    abar = s.alpha_bars[t]
    root = np.sqrt(abar)

    marginal_var = abar * prior.variances + (1.0 - abar)  # (K, d)
    diff = z_t[..., None, :] - root * prior.means  # (..., K, d)
    log_lik = -0.5 * np.sum(np.log(2 * np.pi * marginal_var) + diff ** 2 / marginal_var, axis=-1)
    log_post = log_lik + condition_log_weights(prior, cond, temperature, hard)
    resp = np.exp(log_post - logsumexp(log_post, axis=-1, keepdims=True))

    gain = root * prior.variances / marginal_var
    component_means = prior.means + gain * diff
    return np.sum(resp[..., None] * component_means, axis=-2)


class MixtureOracleDenoiser(BaseDenoiser):
    """Exact posterior-mean denoiser for a known mixture prior"""

    def __init__(self, prior: GaussianMixturePrior, schedule: NoiseSchedule,
                 temperature: float = DEFAULT_TEMPERATURE, hard: bool = False):
        super().__init__(schedule, prior.dim)
        if temperature <= 0:
            raise ConfigurationError("condition temperature must be positive")
        self.prior = prior
        self.temperature = temperature
        self.hard = hard

    def _predict(self, z_t: np.ndarray, t: int, cond: Optional[Condition]) -> np.ndarray:
        z0 = mixture_posterior_mean(self.prior, self.schedule, z_t, t, cond,
                                    self.temperature, self.hard)
        return noise_from_z0(self.schedule, z_t, z0, t)

    def predict_conditional(self, z_t, t, cond):
        return self._predict(z_t, t, cond)

    def predict_unconditional(self, z_t, t):
        return self._predict(z_t, t, None)
