"""
Inpainting trials: a contiguous run of latent frames is erased
The inpaint task keeps the surviving frames noise-free and sends only the
semantic embedding through the noisy channel; the joint task also noises the
surviving frames.
"""

from ..experiment import ExperimentConfig, GridCell, Task, TrialSeeds
from ..shared_models import get_experiment_context
from .base_trial import BaseTrialHandler, TrialOutcome


class InpaintTrialHandler(BaseTrialHandler):
    """Fills erased frames, optionally denoising the rest"""

    def can_handle(self, task: Task) -> bool:
        return task in (Task.INPAINT, Task.JOINT)

    def handle(self, cell: GridCell, trial: int, seeds: TrialSeeds) -> TrialOutcome:
        return self.run_trial(cell, trial, seeds, erased=True,
                              latent_noise=cell.task is Task.JOINT)


def run_inpaint_trial(cfg: ExperimentConfig, cell: GridCell, trial: int,
                      seeds: TrialSeeds) -> TrialOutcome:
    return InpaintTrialHandler(get_experiment_context(cfg)).handle(cell, trial, seeds)
