"""
Codec - Frame-wise orthonormal DCT-II latent codec
Keeps the first r coefficients of every N-sample frame; latents are (frames, r)
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

from ..errors import ConfigurationError, ShapeError
from .audio_config import FRAME_LENGTH, RATE, RETAINED


@dataclass(frozen=True)
class FrameCodec:
    frame_length: int = FRAME_LENGTH
    retained: int = RETAINED

    def __post_init__(self):
        if self.frame_length < 1 or not 1 <= self.retained <= self.frame_length:
            raise ConfigurationError(
                f"need 1 <= retained <= frame_length, got {self.retained}/{self.frame_length}")

    def n_frames(self, n_samples: int) -> int:
        return -(-n_samples // self.frame_length)


def codec_basis(codec: FrameCodec) -> np.ndarray:
    """Rows are the orthonormal DCT-II basis vectors of one frame"""
    return dct(np.eye(codec.frame_length), type=2, norm="ortho", axis=0).T


def encode(codec: FrameCodec, waveform: np.ndarray) -> np.ndarray:
    """Zero-pad to whole frames and keep the low-order coefficients"""
    waveform = np.asarray(waveform, dtype=np.float64)
    if waveform.ndim != 1:
        raise ShapeError("encode expects a mono 1-D waveform")
    frames = codec.n_frames(waveform.size)
    padded = np.zeros(frames * codec.frame_length)
    padded[:waveform.size] = waveform
    coeffs = dct(padded.reshape(frames, codec.frame_length), type=2, norm="ortho", axis=1)
    return coeffs[:, :codec.retained]


def decode(codec: FrameCodec, latent: np.ndarray) -> np.ndarray:
    """Inverse transform with the dropped coefficients set to zero"""
    latent = np.asarray(latent, dtype=np.float64)
    if latent.ndim == 1:
        if latent.size % codec.retained:
            raise ShapeError(f"flat latent size {latent.size} is not a multiple of {codec.retained}")
        latent = latent.reshape(-1, codec.retained)
    if latent.ndim != 2 or latent.shape[1] != codec.retained:
        raise ShapeError(f"latent must be (frames, {codec.retained})")
    full = np.zeros((latent.shape[0], codec.frame_length))
    full[:, :codec.retained] = latent
    return idct(full, type=2, norm="ortho", axis=1).ravel()


def frames_for_seconds(codec: FrameCodec, seconds: float, sample_rate: int = RATE) -> int:
    return int(round(seconds * sample_rate / codec.frame_length))
