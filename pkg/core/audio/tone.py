"""Harmonic tone synthesis"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .audio_config import PEAK, RATE


class ToneSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fundamental_hz: float = Field(gt=0)
    harmonic_amplitudes: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25],
                                             min_length=1)
    duration_s: float = Field(gt=0)
    sample_rate: int = Field(RATE, gt=0)
    peak: float = Field(PEAK, gt=0, le=1.0)

    @model_validator(mode="after")
    def _below_nyquist(self):
        top = self.fundamental_hz * len(self.harmonic_amplitudes)
        if top >= self.sample_rate / 2:
            raise ValueError(f"highest harmonic {top} Hz is above Nyquist")
        if any(a < 0 for a in self.harmonic_amplitudes):
            raise ValueError("harmonic amplitudes must be non-negative")
        return self

    @property
    def length(self) -> int:
        return int(round(self.duration_s * self.sample_rate))


def synth(spec: ToneSpec, rng: np.random.Generator) -> np.ndarray:
    """Sum of harmonics with random phases, scaled to the configured peak"""
    t = np.arange(spec.length) / spec.sample_rate
    phases = rng.uniform(0.0, 2 * np.pi, size=len(spec.harmonic_amplitudes))
    wave = np.zeros(spec.length)
    for h, (amp, phase) in enumerate(zip(spec.harmonic_amplitudes, phases), start=1):
        wave += amp * np.sin(2 * np.pi * h * spec.fundamental_hz * t + phase)
    top = np.max(np.abs(wave))
    if top == 0:
        return wave
    return wave * (spec.peak / top)
