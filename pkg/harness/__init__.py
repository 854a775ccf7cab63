"""
Harness - Experiment orchestration for the restoration simulator
Grid runner, trial handlers, results store and the semcom CLI
"""

from .experiment import ExperimentConfig, GridCell, Method, Task, TrialResult, derive_trial_seeds
from .experiment_runner import ExperimentRunner, run_grid

__all__ = [
    'ExperimentConfig',
    'GridCell',
    'Method',
    'Task',
    'TrialResult',
    'derive_trial_seeds',
    'ExperimentRunner',
    'run_grid',
]
