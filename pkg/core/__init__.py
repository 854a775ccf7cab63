"""
Core - Restoration simulator library for semantic communication links
Used by the experiment harness and the test suite
"""

from .channel import ChannelSpec, ErasureSpec, NoiseKnowledge, Observation, SigmaSource, transmit
from .errors import SemcomError
from .sampler import LambdaMode, RestorationConfig, RestorationResult, restore
from .schedule import NoiseSchedule, build_linear_schedule

__all__ = [
    'ChannelSpec',
    'ErasureSpec',
    'NoiseKnowledge',
    'Observation',
    'SigmaSource',
    'transmit',
    'SemcomError',
    'LambdaMode',
    'RestorationConfig',
    'RestorationResult',
    'restore',
    'NoiseSchedule',
    'build_linear_schedule',
]
