"""Synthetic audio source, frame codec and audition file output"""

from .audio_io import read_wav, write_latents_csv, write_wav
from .codec import FrameCodec, codec_basis, decode, encode, frames_for_seconds
from .tone import ToneSpec, synth

__all__ = [
    'read_wav',
    'write_latents_csv',
    'write_wav',
    'FrameCodec',
    'codec_basis',
    'decode',
    'encode',
    'frames_for_seconds',
    'ToneSpec',
    'synth',
]
