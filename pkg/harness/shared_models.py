"""
Shared Models - Per-process experiment context reused across trials
Schedule, prior, denoiser and clean reference statistics are built once per
configuration and cached, so grid workers pay the set-up cost only once.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from core.audio import FrameCodec, ToneSpec, encode, synth
from core.denoiser import (
    BaseDenoiser,
    GaussianMixturePrior,
    MixtureOracleDenoiser,
    block_embeddings,
    build_note_prior,
    fit_mixture_prior,
    load_denoiser,
)
from core.errors import ConfigurationError
from core.metrics import GaussianStats, fit_stats
from core.schedule import NoiseSchedule, build_schedule

from .experiment import DataSource, DenoiserKind, ExperimentConfig

REFERENCE_STREAM = 0x5EF


@dataclass
class ExperimentContext:
    config: ExperimentConfig
    schedule: NoiseSchedule
    prior: GaussianMixturePrior
    embeddings: np.ndarray  # (K, k) semantic code per class
    frame_dim: int
    codec: Optional[FrameCodec] = None
    denoiser: Optional[BaseDenoiser] = None
    reference: Optional[np.ndarray] = None  # (n_ref, n_frames, frame_dim)
    _region_stats: Dict[Tuple[int, int], GaussianStats] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.prior.dim

    @property
    def n_frames(self) -> int:
        return self.dim // self.frame_dim

    def draw_batch(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """n clean latents (n, d) and their class labels"""
        if self.config.data_source is DataSource.MIXTURE:
            return self.prior.sample(n, rng)
        tone = self.config.tone
        labels = rng.integers(0, len(tone.fundamentals_hz), size=n)
        latents = np.stack([
            _tone_latent(self.codec, tone.fundamentals_hz[k], tone, rng) for k in labels
        ])
        return latents, labels

    def draw_truth(self, rng: np.random.Generator) -> Tuple[np.ndarray, int, np.ndarray]:
        latents, labels = self.draw_batch(1, rng)
        label = int(labels[0])
        return latents[0], label, self.embeddings[label]

    def region_stats(self, start: int, stop: int) -> GaussianStats:
        """Clean reference statistics of frames [start, stop)"""
        key = (start, stop)
        if key not in self._region_stats:
            self._region_stats[key] = fit_stats(
                self.reference[:, start:stop, :].reshape(-1, self.frame_dim))
        return self._region_stats[key]

    def all_stats(self) -> GaussianStats:
        return self.region_stats(0, self.n_frames)


def _tone_latent(codec: FrameCodec, fundamental: float, tone, rng) -> np.ndarray:
    spec = ToneSpec(fundamental_hz=fundamental, harmonic_amplitudes=tone.harmonic_amplitudes,
                    duration_s=tone.clip_seconds)
    return encode(codec, synth(spec, rng)).ravel()


def build_experiment_context(cfg: ExperimentConfig, with_denoiser: bool = True) -> ExperimentContext:
    sched = cfg.schedule
    schedule = build_schedule(sched.family, sched.steps, sched.beta_start, sched.beta_end)

    if cfg.data_source is DataSource.MIXTURE:
        prior = build_note_prior(cfg.prior.dim, cfg.prior.frame_dim, cfg.prior.components,
                                 cfg.prior.within_variance, cfg.prior.embedding_dim,
                                 cfg.prior.notes)
        context = ExperimentContext(config=cfg, schedule=schedule, prior=prior,
                                    embeddings=prior.embeddings, frame_dim=cfg.prior.frame_dim)
    else:
        tone = cfg.tone
        codec = FrameCodec(tone.frame_length, tone.retained)
        embeddings = block_embeddings(len(tone.fundamentals_hz), tone.embedding_dim)
        rng = np.random.default_rng(tone.seed)
        labels = np.repeat(np.arange(len(tone.fundamentals_hz)), tone.training_clips)
        samples = np.stack([_tone_latent(codec, tone.fundamentals_hz[k], tone, rng) for k in labels])
        prior = fit_mixture_prior(samples, labels, embeddings)
        context = ExperimentContext(config=cfg, schedule=schedule, prior=prior,
                                    embeddings=embeddings, frame_dim=tone.retained, codec=codec)
        print(f"[GRID] Fitted {prior.components}-class tone prior on {labels.size} clips "
              f"(d={prior.dim})")

    reference_rng = np.random.default_rng([cfg.master_seed, REFERENCE_STREAM])
    latents, _ = context.draw_batch(cfg.reference_samples, reference_rng)
    context.reference = latents.reshape(cfg.reference_samples, context.n_frames, context.frame_dim)

    if with_denoiser:
        context.denoiser = _build_denoiser(cfg, context)
    return context


def _build_denoiser(cfg: ExperimentConfig, context: ExperimentContext) -> BaseDenoiser:
    if cfg.denoiser is DenoiserKind.ORACLE:
        return MixtureOracleDenoiser(context.prior, context.schedule,
                                     temperature=cfg.restoration.condition_temperature,
                                     hard=cfg.restoration.hard_condition)
    net = load_denoiser(cfg.denoiser_path, context.schedule)
    if net.dim != context.dim or net.cond_dim != context.embeddings.shape[1]:
        raise ConfigurationError(
            f"tiny denoiser ({net.dim}, cond {net.cond_dim}) does not match the data "
            f"({context.dim}, cond {context.embeddings.shape[1]})")
    return net


# Shared contexts (created once per configuration, reused by every trial in the process)
_shared_contexts: Dict[str, ExperimentContext] = {}


def get_experiment_context(cfg: ExperimentConfig) -> ExperimentContext:
    """
    Get the shared context for a configuration.
    Builds it on first call, then reuses the same instance.
    """
    key = cfg.model_dump_json(exclude={"output_dir", "workers", "verbose", "trials",
                                       "diagnostics_trials", "audition_samples"})
    if key not in _shared_contexts:
        _shared_contexts[key] = build_experiment_context(cfg)
    return _shared_contexts[key]
