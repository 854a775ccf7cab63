"""
Training - Noise-prediction training loop for the tiny network
Adam on the diffusion MSE objective with random condition dropout
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from ..errors import ShapeError, TrainingError
from .tiny_network import TinyDenoiser

DIVERGENCE_FACTOR = 10.0


class TrainingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden: int = Field(64, ge=1)
    learning_rate: float = Field(3e-3, gt=0)
    epochs: int = Field(200, ge=1)
    batch_size: int = Field(64, ge=1)
    dataset_size: int = Field(2048, ge=2)
    held_out_size: int = Field(256, ge=1)
    p_uncond: float = Field(0.1, ge=0.0, le=1.0)
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 0


@dataclass
class TrainingReport:
    train_losses: List[float] = field(default_factory=list)
    held_out_losses: List[float] = field(default_factory=list)


@dataclass
class _AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0


def make_batch(net: TinyDenoiser, z0: np.ndarray, embeddings: Optional[np.ndarray],
               p_uncond: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Noise a batch of clean latents at random steps; returns (inputs, target noise)"""
    rows = z0.shape[0]
    t = rng.integers(1, net.schedule.steps + 1, size=rows)
    eps = rng.standard_normal(z0.shape)
    abar = net.schedule.alpha_bars[t][:, None]
    z_t = np.sqrt(abar) * z0 + np.sqrt(1.0 - abar) * eps
    null = rng.random(rows) < p_uncond if embeddings is not None else np.ones(rows, dtype=bool)
    return net.features(z_t, t, embeddings, null), eps


def gradient_check(net: TinyDenoiser, x: np.ndarray, target: np.ndarray,
                   n_params: int = 100, h: float = 1e-5,
                   rng: Optional[np.random.Generator] = None) -> float:
    """Largest relative error between analytic and central-difference gradients"""
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = net.theta
    _, analytic = net.loss_and_grad(x, target)
    picks = rng.choice(theta.size, size=min(n_params, theta.size), replace=False)

    worst = 0.0
    try:
        for i in picks:
            bumped = theta.copy()
            bumped[i] = theta[i] + h
            net.theta = bumped
            up, _ = net.loss_and_grad(x, target)
            bumped[i] = theta[i] - h
            net.theta = bumped
            down, _ = net.loss_and_grad(x, target)
            numeric = (up - down) / (2 * h)
            rel = abs(analytic[i] - numeric) / max(abs(analytic[i]) + abs(numeric), 1e-6)
            worst = max(worst, rel)
    finally:
        net.theta = theta
    return worst


def train_tiny_denoiser(net: TinyDenoiser, z0: np.ndarray, embeddings: Optional[np.ndarray],
                        config: TrainingConfig, verbose: bool = False) -> TrainingReport:
    """
    Train on clean latents ``z0`` (n, d) with per-row embeddings (n, k) or None.

    The held-out loss is recorded before the first epoch and after every epoch
    on a fixed noised batch.
    """
    z0 = np.asarray(z0, dtype=np.float64)
    if z0.ndim != 2 or z0.shape[1] != net.dim:
        raise ShapeError(f"training latents must be (n, {net.dim})")
    if embeddings is not None:
        embeddings = np.asarray(embeddings, dtype=np.float64)
        if embeddings.shape != (z0.shape[0], net.cond_dim):
            raise ShapeError(f"training embeddings must be (n, {net.cond_dim})")

    rng = np.random.default_rng(config.seed)
    held_idx = rng.integers(0, z0.shape[0], size=config.held_out_size)
    held_emb = None if embeddings is None else embeddings[held_idx]
    held_x, held_eps = make_batch(net, z0[held_idx], held_emb, config.p_uncond, rng)

    report = TrainingReport()
    report.held_out_losses.append(net.loss_and_grad(held_x, held_eps)[0])
    state = _AdamState(m=np.zeros_like(net.theta), v=np.zeros_like(net.theta))

    epochs = tqdm(range(config.epochs), desc="train", disable=not verbose)
    for epoch in epochs:
        order = rng.permutation(z0.shape[0])
        losses = []
        for start in range(0, order.size, config.batch_size):
            rows = order[start:start + config.batch_size]
            emb = None if embeddings is None else embeddings[rows]
            x, eps = make_batch(net, z0[rows], emb, config.p_uncond, rng)
            loss, grad = net.loss_and_grad(x, eps)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise TrainingError(f"non-finite loss at epoch {epoch}",
                                    diagnostics={"epoch": epoch, "loss": loss,
                                                 "last_losses": losses[-5:]})
            if loss > DIVERGENCE_FACTOR * report.held_out_losses[0]:
                raise TrainingError(
                    f"training diverged at epoch {epoch}: loss {loss:.4g} exceeds "
                    f"{DIVERGENCE_FACTOR:g}x the initial {report.held_out_losses[0]:.4g}",
                    diagnostics={"epoch": epoch, "loss": loss,
                                 "initial_loss": report.held_out_losses[0],
                                 "last_losses": losses[-5:]})
            net.theta = _adam_update(net.theta, grad, state, config)
            losses.append(loss)

        report.train_losses.append(float(np.mean(losses)))
        report.held_out_losses.append(net.loss_and_grad(held_x, held_eps)[0])
        if verbose:
            epochs.set_postfix(loss=f"{report.train_losses[-1]:.4f}",
                               held_out=f"{report.held_out_losses[-1]:.4f}")
    return report


def _adam_update(theta: np.ndarray, grad: np.ndarray, state: _AdamState,
                 config: TrainingConfig) -> np.ndarray:
    state.step += 1
    state.m = config.beta1 * state.m + (1 - config.beta1) * grad
    state.v = config.beta2 * state.v + (1 - config.beta2) * grad ** 2
    m_hat = state.m / (1 - config.beta1 ** state.step)
    v_hat = state.v / (1 - config.beta2 ** state.step)
    return theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)
