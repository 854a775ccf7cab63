"""Base class for noise-prediction models and classifier-free guidance"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ShapeError
from ..schedule import NoiseSchedule, estimate_z0


@dataclass(frozen=True)
class Condition:
    """
    Semantic side information for a denoiser call.

    ``component`` is the clean mixture identity when it is known exactly,
    ``embedding`` is a (possibly noisy) semantic embedding, ``null`` requests
    the unconditional prediction.
    """

    embedding: Optional[np.ndarray] = None
    component: Optional[int] = None
    null: bool = False

    @classmethod
    def unconditional(cls) -> "Condition":
        return cls(null=True)

    @property
    def is_null(self) -> bool:
        return self.null or (self.embedding is None and self.component is None)


class BaseDenoiser(ABC):
    """Predicts the noise in z_t for a fixed schedule"""

    def __init__(self, schedule: NoiseSchedule, dim: int):
        self.schedule = schedule
        self.dim = dim

    @abstractmethod
    def predict_conditional(self, z_t: np.ndarray, t: int, cond: Condition) -> np.ndarray:
        """Noise prediction given side information"""
        pass

    @abstractmethod
    def predict_unconditional(self, z_t: np.ndarray, t: int) -> np.ndarray:
        """Noise prediction with the condition dropped"""
        pass

    def check_input(self, z_t: np.ndarray) -> np.ndarray:
        z_t = np.asarray(z_t, dtype=np.float64)
        if z_t.ndim == 0 or z_t.shape[-1] != self.dim:
            raise ShapeError(f"denoiser expects last axis {self.dim}, got shape {z_t.shape}")
        return z_t

    def predict_noise(self, z_t: np.ndarray, t: int, cond: Optional[Condition],
                      guidance_scale: float) -> np.ndarray:
        return predict_noise(self, z_t, t, cond, guidance_scale)

    def estimate_z0(self, z_t: np.ndarray, t: int, cond: Optional[Condition],
                    guidance_scale: float) -> np.ndarray:
        eps = self.predict_noise(z_t, t, cond, guidance_scale)
        return estimate_z0(self.schedule, z_t, eps, t)


def predict_noise(model: BaseDenoiser, z_t: np.ndarray, t: int, cond: Optional[Condition],
                  guidance_scale: float) -> np.ndarray:
    """
    Classifier-free guided noise prediction eps_u + s (eps_c - eps_u).

    s == 0 and s == 1 return the unconditional and conditional predictions
    exactly; a null condition always returns the unconditional one.
    """
    z_t = model.check_input(z_t)
    if cond is None or cond.is_null or guidance_scale == 0.0:
        return model.predict_unconditional(z_t, t)
    eps_cond = model.predict_conditional(z_t, t, cond)
    if guidance_scale == 1.0:
        return eps_cond
    eps_uncond = model.predict_unconditional(z_t, t)
    return eps_uncond + guidance_scale * (eps_cond - eps_uncond)
