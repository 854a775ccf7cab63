"""Shared fixtures for the simulator tests"""

import numpy as np
import pytest

from core.denoiser import MixtureOracleDenoiser, build_note_prior
from core.schedule import build_linear_schedule
from harness.experiment import ExperimentConfig


@pytest.fixture(scope="session")
def schedule():
    return build_linear_schedule(1000)


@pytest.fixture(scope="session")
def short_schedule():
    return build_linear_schedule(50, 1e-3, 0.2)


@pytest.fixture(scope="session")
def note_prior():
    return build_note_prior(64, frame_dim=4, components=4, within_variance=0.01, embedding_dim=64)


@pytest.fixture(scope="session")
def oracle(note_prior, schedule):
    return MixtureOracleDenoiser(note_prior, schedule)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config(tmp_path):
    """Fast grid settings: short chain, small latent"""

    def make(**overrides):
        data = {
            "task": "denoise",
            "psnr_grid": [15, 30],
            "trials": 3,
            "schedule": {"steps": 20, "beta_start": 1e-3, "beta_end": 0.3},
            "prior": {"components": 3, "dim": 32, "frame_dim": 2, "within_variance": 0.005,
                      "embedding_dim": 16},
            "reference_samples": 64,
            "output_dir": str(tmp_path / "out"),
        }
        data.update(overrides)
        return ExperimentConfig.model_validate(data)

    return make
