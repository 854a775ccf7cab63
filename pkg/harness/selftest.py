"""
Selftest - Fast in-process invariant checks for `semcom selftest`
"""

from typing import Callable, List, Tuple

import numpy as np

from core.channel import ChannelSpec, ErasureSpec, NoiseKnowledge, transmit
from core.denoiser import MixtureOracleDenoiser, build_note_prior
from core.linop import DenseOperator, combine_solution, contiguous_mask, decompose
from core.metrics import GaussianStats, frechet_distance
from core.sampler import LambdaMode, RestorationConfig, lambda_gamma, restore, restore_noiseless
from core.schedule import build_linear_schedule


def check_schedule():
    s = build_linear_schedule(1000)
    assert s.posterior_variances[1] == 0.0
    assert np.all(np.diff(s.alpha_bars) < 0)
    assert np.all(s.posterior_variances[2:] > 0)


def check_projector():
    rng = np.random.default_rng(1)
    A = DenseOperator(rng.standard_normal((5, 8)))
    z = rng.standard_normal(8)
    range_part, null_part = decompose(A, z)
    assert np.allclose(range_part + null_part, z, atol=1e-12)
    assert np.max(np.abs(A.apply(null_part))) <= 1e-10


def check_mask_consistency():
    A = contiguous_mask(20, 2, 0.25, 0.25)
    y = A.apply(np.arange(40.0))
    merged = combine_solution(A, y, np.full(40, 7.0))
    assert np.all(merged[A.kept_mask] == y[A.kept_mask])
    assert np.all(merged[~A.kept_mask] == 7.0)


def check_variance_contract():
    s = build_linear_schedule(1000)
    for mode in LambdaMode:
        for sigma_y in (0.0, 0.01, 0.3, 2.0):
            for t in (2, 10, 100, 1000):
                lam, gamma = lambda_gamma(s, t, sigma_y, mode)
                c = s.coef_z0[t]
                assert 0.0 < lam <= 1.0 and gamma >= 0.0
                assert abs((c * lam * sigma_y) ** 2 + gamma - s.posterior_variances[t]) <= 1e-12


def check_frechet():
    a = GaussianStats(mean=np.zeros(2), cov=np.eye(2), count=10)
    b = GaussianStats(mean=np.array([3.0, 4.0]), cov=np.eye(2), count=10)
    assert abs(frechet_distance(a, b) - 25.0) <= 1e-9


def check_noiseless_degeneration():
    s = build_linear_schedule(50, 1e-3, 0.2)
    prior = build_note_prior(16, components=2, embedding_dim=16)
    model = MixtureOracleDenoiser(prior, s)
    z, _ = prior.sample(1, np.random.default_rng(3))
    spec = ChannelSpec(psnr_db=float("inf"), erasure=ErasureSpec(start_fraction=0.5,
                                                                 length_fraction=0.25),
                       noise_knowledge=NoiseKnowledge.KNOWN_SIGMA)
    obs = transmit(z[0], None, spec, np.random.default_rng(4))
    cfg = RestorationConfig(guidance_scale=1.0, sigma_y=0.0, seed=5)
    a = restore(model, s, obs, None, cfg).z0_hat
    b = restore_noiseless(model, s, obs, None, cfg).z0_hat
    assert np.array_equal(a, b)


CHECKS: List[Tuple[str, Callable[[], None]]] = [
    ("schedule tables", check_schedule),
    ("range/null projector", check_projector),
    ("mask consistency", check_mask_consistency),
    ("lambda/gamma variance contract", check_variance_contract),
    ("frechet distance", check_frechet),
    ("noiseless degeneration", check_noiseless_degeneration),
]


def run_selftest() -> bool:
    """Run every check, print one line each, return True when all pass"""
    passed = 0
    for name, check in CHECKS:
        try:
            check()
            print(f"✅ {name}")
            passed += 1
        except Exception as e:
            print(f"❌ {name}: {type(e).__name__}: {e}")
    print(f"[DONE] {passed}/{len(CHECKS)} checks passed")
    return passed == len(CHECKS)
