"""Base class for trial handlers"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from core.channel import ChannelSpec, ErasureSpec, transmit, working_sigma
from core.denoiser import Condition
from core.errors import SemcomError
from core.linop import erased_frame_range
from core.metrics import fit_stats, frechet_distance, region_features, snr_db
from core.sampler import RestorationConfig, RestorationResult, replace_baseline, restore

from ..experiment import GridCell, Method, Task, TrialResult, TrialSeeds, TrialStatus
from ..shared_models import ExperimentContext


@dataclass
class TrialOutcome:
    result: TrialResult
    diagnostics: Optional[Dict[str, np.ndarray]] = None
    latents: Optional[Dict[str, np.ndarray]] = None  # truth / received / restored, for audition


class BaseTrialHandler(ABC):
    """Base class for all trial handlers"""

    def __init__(self, context: ExperimentContext):
        """
        Initialize handler with context

        Args:
            context: Shared experiment context (schedule, prior, denoiser, references)
        """
        self.context = context
        self.config = context.config

    @abstractmethod
    def can_handle(self, task: Task) -> bool:
        """
        Check if this handler can run trials of the given task

        Args:
            task: Restoration task of the grid cell

        Returns:
            bool: True if this handler runs the task
        """
        pass

    @abstractmethod
    def handle(self, cell: GridCell, trial: int, seeds: TrialSeeds) -> TrialOutcome:
        """
        Run one trial

        Args:
            cell: Grid cell (task, PSNR, method)
            trial: Trial index within the cell
            seeds: Seed streams for this trial
        """
        pass

    def run_trial(self, cell: GridCell, trial: int, seeds: TrialSeeds,
                  erased: bool, latent_noise: bool) -> TrialOutcome:
        """Shared transmit / restore / measure pipeline; failures become failed rows"""
        started = time.perf_counter()
        base = dict(task=cell.task, method=cell.method, psnr_index=cell.psnr_index,
                    psnr_db=cell.psnr_db, trial=trial)
        try:
            outcome = self._run(cell, trial, seeds, erased, latent_noise, base)
        except SemcomError as exc:
            print(f"[WARN] Trial {trial} at {cell.psnr_db} dB ({cell.method.value}) failed: {exc}")
            outcome = TrialOutcome(result=TrialResult(**base, status=TrialStatus.FAILED,
                                                      error=f"{type(exc).__name__}: {exc}"))
        outcome.result.wall_time_s = time.perf_counter() - started
        return outcome

    def _run(self, cell, trial, seeds, erased, latent_noise, base) -> TrialOutcome:
        cfg = self.config
        ctx = self.context
        data_rng, channel_rng, sampler_rng = seeds.generators()

        z0, label, embedding = ctx.draw_truth(data_rng)
        erasure = None
        region = None
        if erased:
            length = cfg.erasure.length_fraction
            start = cfg.erasure.start_fraction
            if start is None:
                start = float(data_rng.uniform(0.0, 1.0 - length))
            erasure = ErasureSpec(start_fraction=start, length_fraction=length)
            region = erased_frame_range(ctx.n_frames, start, length)

        spec = ChannelSpec(
            psnr_db=cell.psnr_db,
            erasure=erasure,
            noise_knowledge=cfg.restoration.noise_knowledge,
            manual_sigma=cfg.restoration.manual_sigma,
            frame_dim=ctx.frame_dim,
            latent_noise=latent_noise,
        )
        obs = transmit(z0, embedding, spec, channel_rng)
        sigma_star = working_sigma(obs, spec, cfg.sigma_source)

        restoration = RestorationConfig(guidance_scale=cfg.restoration.guidance_scale,
                                        sigma_y=sigma_star,
                                        lambda_mode=cfg.restoration.lambda_mode,
                                        noise_budget=cfg.restoration.noise_budget,
                                        exact_terminal=not latent_noise)
        cond = Condition(embedding=obs.condition_received)
        if cell.method is Method.RESTORE:
            restored = restore(ctx.denoiser, ctx.schedule, obs, cond, restoration, sampler_rng)
        else:
            restored = replace_baseline(ctx.denoiser, ctx.schedule, obs, cond, restoration,
                                        sampler_rng)

        z0_hat = restored.z0_hat
        received = obs.operator.pinv_apply(obs.y)
        observed = obs.operator.observed_mask()
        result = TrialResult(
            **base,
            snr_restored_db=snr_db(z0, z0_hat),
            snr_received_db=snr_db(z0, received),
            fd_all=self._fd(z0_hat, (0, ctx.n_frames)),
            fd_inp=self._fd(z0_hat, region) if region is not None else None,
            consistency_residual=float(np.max(np.abs(z0_hat[observed] - obs.y[observed]),
                                              initial=0.0)),
            sigma_star=sigma_star,
            component=label,
            erased_start_frame=None if region is None else region[0],
            erased_frames=None if region is None else region[1] - region[0],
        )
        return TrialOutcome(
            result=result,
            diagnostics=self._diagnostics(trial, restored),
            latents=self._latents(trial, z0, received, z0_hat),
        )

    def _fd(self, z0_hat: np.ndarray, region) -> Optional[float]:
        if region[1] - region[0] < 2:
            return None
        stats = fit_stats(region_features(z0_hat, region, self.context.frame_dim))
        return frechet_distance(stats, self.context.region_stats(*region))

    def _diagnostics(self, trial: int, restored: RestorationResult):
        if trial >= self.config.diagnostics_trials:
            return None
        return {"lambda": restored.lambdas, "gamma": restored.gammas,
                "residual": restored.residuals}

    def _latents(self, trial: int, truth, received, restored):
        if trial >= self.config.audition_samples:
            return None
        return {"truth": truth, "received": received, "restored": restored}
