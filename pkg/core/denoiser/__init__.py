"""Noise-prediction models: exact mixture oracle and the tiny trainable network"""

from .base_denoiser import BaseDenoiser, Condition, predict_noise
from .mixture_oracle import (
    GaussianMixturePrior,
    MixtureOracleDenoiser,
    block_embeddings,
    build_note_prior,
    condition_log_weights,
    fit_mixture_prior,
    mixture_posterior_mean,
)
from .tiny_network import TinyDenoiser, load_denoiser, save_denoiser
from .training import TrainingConfig, TrainingReport, gradient_check, train_tiny_denoiser

__all__ = [
    'BaseDenoiser',
    'Condition',
    'predict_noise',
    'GaussianMixturePrior',
    'MixtureOracleDenoiser',
    'block_embeddings',
    'build_note_prior',
    'condition_log_weights',
    'fit_mixture_prior',
    'mixture_posterior_mean',
    'TinyDenoiser',
    'load_denoiser',
    'save_denoiser',
    'TrainingConfig',
    'TrainingReport',
    'gradient_check',
    'train_tiny_denoiser',
]
