"""Statistical behaviour of full-length restoration grids (run with -m slow)"""

import numpy as np
import pytest

from harness.experiment import ExperimentConfig
from harness.experiment_runner import run_grid

pytestmark = pytest.mark.slow

GRID = [15.0, 17.5, 20.0, 30.0]
TRIALS = 100


def _rows(run, method="restore"):
    return [o.result for o in run.outcomes if o.result.method.value == method]


def _mean(rows, psnr, field):
    values = [getattr(r, field) for r in rows if r.psnr_db == psnr and getattr(r, field) is not None]
    return float(np.mean(values))


@pytest.fixture(scope="module")
def denoise_run(tmp_path_factory):
    cfg = ExperimentConfig(task="denoise", psnr_grid=GRID, trials=TRIALS,
                           output_dir=str(tmp_path_factory.mktemp("denoise")))
    return run_grid(cfg)


def test_restoration_improves_low_psnr_links(denoise_run):
    rows = _rows(denoise_run)
    gain = _mean(rows, 15.0, "snr_restored_db") - _mean(rows, 15.0, "snr_received_db")
    assert gain >= 3.0


def test_restored_snr_rises_with_channel_quality(denoise_run):
    rows = _rows(denoise_run)
    means = [_mean(rows, psnr, "snr_restored_db") for psnr in GRID]
    assert all(later >= earlier for earlier, later in zip(means, means[1:]))


def test_blind_noise_estimate_close_to_known_sigma(denoise_run, tmp_path):
    known = run_grid(ExperimentConfig(task="denoise", psnr_grid=[20.0], trials=TRIALS,
                                      restoration={"noise_knowledge": "known_sigma"},
                                      output_dir=str(tmp_path / "known")))
    blind = _mean(_rows(denoise_run), 20.0, "snr_restored_db")
    oracle_sigma = _mean(_rows(known), 20.0, "snr_restored_db")
    assert blind >= oracle_sigma - 1.0


@pytest.mark.parametrize("psnr", [15.0, 17.5])
def test_inpainting_no_worse_than_replacement_baseline(tmp_path, psnr):
    cfg = ExperimentConfig(task="inpaint", psnr_grid=[psnr], trials=TRIALS,
                           methods=["restore", "replace_baseline"],
                           output_dir=str(tmp_path / "inpaint"))
    run = run_grid(cfg)
    restored = _mean(_rows(run, "restore"), psnr, "fd_inp")
    baseline = _mean(_rows(run, "replace_baseline"), psnr, "fd_inp")
    assert restored <= baseline + 1e-9


def test_joint_restoration_beats_replacement_on_noisy_latents(tmp_path):
    cfg = ExperimentConfig(task="joint", psnr_grid=[15.0], trials=TRIALS,
                           methods=["restore", "replace_baseline"],
                           output_dir=str(tmp_path / "joint"))
    run = run_grid(cfg)
    restored = _mean(_rows(run, "restore"), 15.0, "snr_restored_db")
    baseline = _mean(_rows(run, "replace_baseline"), 15.0, "snr_restored_db")
    assert restored > baseline
