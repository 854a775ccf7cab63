"""
Errors - Exception hierarchy for the restoration simulator
Every failure raised by core and harness code derives from SemcomError
"""

from typing import Any, Dict, Optional


class SemcomError(Exception):
    """Base class for all simulator errors"""


class ConfigurationError(SemcomError, ValueError):
    """Invalid schedule, channel, codec or experiment settings"""


class ShapeError(SemcomError, ValueError):
    """Array dimensions do not match the operator or model"""


class ContractError(SemcomError):
    """A precondition on an operation's arguments was violated"""


class EstimationError(SemcomError):
    """Not enough data to estimate a statistic"""


class InvariantViolation(SemcomError):
    """A numerical invariant failed by more than its tolerance"""


class TrainingError(SemcomError):
    """Tiny network training failed"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SamplerDivergenceError(SemcomError):
    """Sampler state became non-finite"""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite sampler state at step t={step}")
