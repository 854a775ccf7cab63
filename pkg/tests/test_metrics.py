import numpy as np
import pytest

from core import metrics
from core.errors import ContractError, ShapeError
from core.metrics import (
    SNR_CAP_DB,
    GaussianStats,
    fit_stats,
    frechet_distance,
    region_features,
    snr_db,
)


def _stats(mean, cov):
    mean = np.asarray(mean, dtype=np.float64)
    return GaussianStats(mean=mean, cov=np.asarray(cov, dtype=np.float64), count=10)


def test_frechet_mean_shift_only():
    a = _stats([0.0, 0.0], np.eye(2))
    b = _stats([3.0, 4.0], np.eye(2))
    assert frechet_distance(a, b) == pytest.approx(25.0, abs=1e-9)


def test_frechet_diagonal_closed_form():
    a = _stats([0.0, 0.0], np.diag([1.0, 4.0]))
    b = _stats([0.0, 0.0], np.diag([9.0, 1.0]))
    # sum over axes of (sqrt(a) - sqrt(b))^2
    assert frechet_distance(a, b) == pytest.approx((1 - 3) ** 2 + (2 - 1) ** 2, abs=1e-9)


def test_frechet_identity_and_symmetry(rng):
    m = rng.standard_normal((4, 4))
    n = rng.standard_normal((4, 4))
    a = _stats(rng.standard_normal(4), m @ m.T)
    b = _stats(rng.standard_normal(4), n @ n.T)
    assert frechet_distance(a, a) == pytest.approx(0.0, abs=1e-9)
    assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), abs=1e-9)
    assert frechet_distance(a, b) >= 0.0


def test_frechet_rejects_bad_covariances():
    good = _stats([0.0, 0.0], np.eye(2))
    with pytest.raises(ContractError):
        frechet_distance(good, _stats([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ContractError):
        frechet_distance(good, _stats([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ShapeError):
        frechet_distance(good, _stats([0.0], [[1.0]]))


def test_fit_stats_unbiased_covariance():
    stats = fit_stats(np.array([[1.0, 2.0], [3.0, 2.0]]))
    assert np.array_equal(stats.mean, [2.0, 2.0])
    assert np.allclose(stats.cov, np.diag([2.0, 0.0]))
    assert stats.count == 2
    with pytest.raises(ContractError):
        fit_stats(np.ones((1, 3)))


def test_fit_stats_single_feature():
    stats = fit_stats(np.array([[1.0], [2.0], [3.0]]))
    assert stats.cov.shape == (1, 1)
    assert stats.cov[0, 0] == pytest.approx(1.0)


def test_snr_values():
    assert snr_db(np.ones(4), np.ones(4) * 1.1) == pytest.approx(20.0)
    assert snr_db(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == SNR_CAP_DB
    with pytest.raises(ContractError):
        snr_db(np.zeros(3), np.ones(3))
    with pytest.raises(ShapeError):
        snr_db(np.ones(3), np.ones(4))


def test_region_features_selects_frames():
    signal = np.arange(12.0)
    features = region_features(signal, (1, 3), 4)
    assert np.array_equal(features, [[4.0, 5.0, 6.0, 7.0], [8.0, 9.0, 10.0, 11.0]])
    with pytest.raises(ShapeError):
        region_features(signal, (0, 1), 5)
    with pytest.raises(ContractError):
        region_features(signal, (2, 4), 4)
    with pytest.raises(ContractError):
        region_features(signal, (1, 1), 4)
    with pytest.raises(ContractError):
        region_features(signal, (2, 1), 4)


def test_covariance_clipped_to_positive_semi_definite():
    clipped = metrics._clip_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    # eigenvalues 3 and -1; only the positive direction survives
    assert np.allclose(clipped, [[1.5, 1.5], [1.5, 1.5]])
    assert np.linalg.eigvalsh(clipped).min() >= -1e-12

    unchanged = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.array_equal(metrics._clip_psd(unchanged), unchanged)


def test_fit_stats_on_rank_deficient_features(rng):
    base = rng.standard_normal((40, 2))
    features = np.column_stack([base, base.sum(axis=1)])
    stats = fit_stats(features)
    assert np.linalg.eigvalsh(stats.cov).min() >= -1e-12
    assert frechet_distance(stats, stats) == pytest.approx(0.0, abs=1e-6)


def test_frechet_round_off_clamped_but_real_negatives_rejected(monkeypatch):
    a = _stats([0.0, 0.0], np.eye(2))
    true_eigvalsh = np.linalg.eigvalsh

    monkeypatch.setattr(metrics.np.linalg, "eigvalsh",
                        lambda m: true_eigvalsh(m) * np.array([(1.0 + 5e-13) ** 2, 1.0]))
    assert frechet_distance(a, a) == 0.0

    monkeypatch.setattr(metrics.np.linalg, "eigvalsh", lambda m: np.full(m.shape[0], 10.0))
    with pytest.raises(ContractError):
        frechet_distance(a, a)
