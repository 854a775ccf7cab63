"""
TrialDispatcher - Routes grid jobs to the handler for their task
"""

from typing import List

from core.errors import ConfigurationError

from .experiment import ExperimentConfig, TrialJob, derive_trial_seeds
from .shared_models import ExperimentContext, get_experiment_context
from .trials import BaseTrialHandler, DenoiseTrialHandler, InpaintTrialHandler, TrialOutcome


class TrialDispatcher:
    """Dispatches trial jobs to registered handlers"""

    def __init__(self, context: ExperimentContext):
        self.context = context
        self.handlers: List[BaseTrialHandler] = []
        self._register_default_handlers()

    def _register_default_handlers(self):
        self.register_handler(DenoiseTrialHandler(self.context))
        self.register_handler(InpaintTrialHandler(self.context))

    def register_handler(self, handler: BaseTrialHandler):
        self.handlers.append(handler)

    def dispatch(self, job: TrialJob) -> TrialOutcome:
        cell = job.cell
        seeds = derive_trial_seeds(self.context.config.master_seed, cell.task,
                                   cell.psnr_index, job.trial)
        for handler in self.handlers:
            if handler.can_handle(cell.task):
                return handler.handle(cell, job.trial, seeds)
        raise ConfigurationError(f"no handler registered for task '{cell.task.value}'")


def execute_job(cfg: ExperimentConfig, job: TrialJob) -> TrialOutcome:
    """Process-pool entry point: run one job against the shared context"""
    return TrialDispatcher(get_experiment_context(cfg)).dispatch(job)
