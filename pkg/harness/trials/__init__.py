"""Trial handlers: one per restoration task"""

from .base_trial import BaseTrialHandler, TrialOutcome
from .denoise_trial import DenoiseTrialHandler, run_denoise_trial
from .inpaint_trial import InpaintTrialHandler, run_inpaint_trial

__all__ = [
    'BaseTrialHandler',
    'TrialOutcome',
    'DenoiseTrialHandler',
    'run_denoise_trial',
    'InpaintTrialHandler',
    'run_inpaint_trial',
]
