"""Denoising trials: full latent over an AWGN link"""

from ..experiment import ExperimentConfig, GridCell, Task, TrialSeeds
from ..shared_models import get_experiment_context
from .base_trial import BaseTrialHandler, TrialOutcome


class DenoiseTrialHandler(BaseTrialHandler):
    """Restores a latent received through noise only"""

    def can_handle(self, task: Task) -> bool:
        return task is Task.DENOISE

    def handle(self, cell: GridCell, trial: int, seeds: TrialSeeds) -> TrialOutcome:
        return self.run_trial(cell, trial, seeds, erased=False, latent_noise=True)


def run_denoise_trial(cfg: ExperimentConfig, cell: GridCell, trial: int,
                      seeds: TrialSeeds) -> TrialOutcome:
    return DenoiseTrialHandler(get_experiment_context(cfg)).handle(cell, trial, seeds)
