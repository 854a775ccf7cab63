"""WAV and latent CSV output for audition samples"""

import csv
import os
from typing import Tuple

import numpy as np
from scipy.io import wavfile

from .audio_config import RATE, WAV_DTYPE


def write_wav(path: str, waveform: np.ndarray, sample_rate: int = RATE):
    """Mono 32-bit float WAV, clipped to [-1, 1]"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    data = np.clip(np.asarray(waveform, dtype=np.float64), -1.0, 1.0).astype(WAV_DTYPE)
    wavfile.write(path, sample_rate, data)


def read_wav(path: str) -> Tuple[int, np.ndarray]:
    rate, data = wavfile.read(path)
    return rate, np.asarray(data, dtype=np.float64)


def write_latents_csv(path: str, latent: np.ndarray):
    """One frame per row, coefficients as columns"""
    latent = np.atleast_2d(np.asarray(latent, dtype=np.float64))
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"c{i}" for i in range(latent.shape[1])])
        for row in latent:
            writer.writerow([repr(float(v)) for v in row])
