import numpy as np
import pytest

from core.channel import ChannelSpec, ErasureSpec, NoiseKnowledge, Observation, transmit
from core.denoiser import (
    BaseDenoiser,
    Condition,
    GaussianMixturePrior,
    MixtureOracleDenoiser,
)
from core.errors import ContractError, SamplerDivergenceError
from core.linop import IdentityOperator, MaskOperator
from core.schedule import build_linear_schedule
from core.sampler import (
    LambdaMode,
    NoiseBudget,
    RestorationConfig,
    ancestral_sample,
    lambda_gamma,
    replace_baseline,
    restore,
    restore_noiseless,
)


def _gaussian_oracle(schedule, dim, mean=0.0, variance=1.0):
    prior = GaussianMixturePrior(weights=np.ones(1), means=np.full((1, dim), mean),
                                 variances=np.full((1, dim), variance))
    return MixtureOracleDenoiser(prior, schedule)


class _NanDenoiser(BaseDenoiser):

    def predict_conditional(self, z_t, t, cond):
        return np.full(z_t.shape, np.nan)

    def predict_unconditional(self, z_t, t):
        return np.full(z_t.shape, np.nan)


@pytest.mark.parametrize("mode", list(LambdaMode))
def test_variance_contract_holds_on_a_grid(schedule, mode):
    for sigma_y in (0.0, 1e-4, 0.05, 0.3, 1.0, 5.0):
        for t in range(2, schedule.steps + 1, 37):
            lam, gamma = lambda_gamma(schedule, t, sigma_y, mode)
            c = schedule.coef_z0[t]
            assert 0.0 < lam <= 1.0
            assert gamma >= 0.0
            assert abs((c * lam * sigma_y) ** 2 + gamma - schedule.posterior_variances[t]) <= 1e-12


def test_lambda_rules(schedule):
    t = 10
    sigma = schedule.posterior_sigmas[t]
    c = schedule.coef_z0[t]
    assert lambda_gamma(schedule, t, 0.0) == (1.0, schedule.posterior_variances[t])

    sigma_y = 2.0 * sigma / c
    lam, gamma = lambda_gamma(schedule, t, sigma_y, LambdaMode.SIGMA_RATIO)
    assert lam == pytest.approx(sigma / sigma_y)
    assert gamma > 0.0
    lam, gamma = lambda_gamma(schedule, t, sigma_y, LambdaMode.EXACT_ZERO_GAMMA)
    assert lam == pytest.approx(0.5)
    assert gamma == 0.0


def test_lambda_gamma_preconditions(schedule):
    with pytest.raises(ContractError):
        lambda_gamma(schedule, 1, 0.1)
    with pytest.raises(ContractError):
        lambda_gamma(schedule, 5, -0.1)


def test_noiseless_restoration_is_consistent(oracle, note_prior):
    rng = np.random.default_rng(21)
    z0, labels = note_prior.sample(1, rng)
    spec = ChannelSpec(psnr_db="inf", erasure=ErasureSpec(start_fraction=0.3, length_fraction=0.2),
                       noise_knowledge=NoiseKnowledge.KNOWN_SIGMA, frame_dim=4)
    obs = transmit(z0[0], note_prior.embeddings[labels[0]], spec, rng)
    cond = Condition(embedding=obs.condition_received)
    result = restore(oracle, oracle.schedule, obs, cond, RestorationConfig(sigma_y=0.0, seed=3))
    kept = obs.operator.observed_mask()
    assert np.max(np.abs(result.z0_hat[kept] - obs.y[kept])) <= 1e-6
    assert np.all(result.lambdas[1:] == 1.0)
    assert result.residuals[1] <= 1e-6


def test_zero_noise_restore_is_bit_identical_to_noiseless(short_schedule):
    model = _gaussian_oracle(short_schedule, 8)
    obs = Observation(y=MaskOperator(8, [0, 2, 3, 7]).apply(np.arange(8.0)),
                      operator=MaskOperator(8, [0, 2, 3, 7]), condition_received=None)
    cfg = RestorationConfig(sigma_y=0.0, seed=99)
    a = restore(model, short_schedule, obs, None, cfg, batch=3)
    b = restore_noiseless(model, short_schedule, obs, None, cfg, batch=3)
    assert np.array_equal(a.z0_hat, b.z0_hat)
    assert a.z0_hat.shape == (3, 8)


def _expected_gain(schedule, sigma_y, mode=LambdaMode.SIGMA_RATIO):
    """E[z0_hat] / y for a standard Gaussian prior observed through the identity"""
    m = 0.0
    lam = 1.0
    for t in range(schedule.steps, 1, -1):
        lam, _ = lambda_gamma(schedule, t, sigma_y, mode)
        root = np.sqrt(schedule.alpha_bars[t])
        m = schedule.coef_z0[t] * ((1.0 - lam) * root * m + lam) + schedule.coef_zt[t] * m
    return (1.0 - lam) * np.sqrt(schedule.alpha_bars[1]) * m + lam


def test_linear_gaussian_mean_follows_recursion(schedule):
    dim = 8
    model = _gaussian_oracle(schedule, dim)
    y = np.full(dim, 2.0)
    obs = Observation(y=y, operator=IdentityOperator(dim), condition_received=None)
    runs = 2000
    result = restore(model, schedule, obs, None, RestorationConfig(sigma_y=1.0, seed=4),
                     batch=runs)
    expected = _expected_gain(schedule, 1.0) * y
    mean = result.z0_hat.mean(axis=0)
    assert np.linalg.norm(mean - expected) <= 0.02 * np.linalg.norm(expected)


def test_small_channel_noise_approaches_bayes_mean(schedule):
    sigma_y = 0.05
    gain = _expected_gain(schedule, sigma_y)
    assert abs(gain - 1.0 / (1.0 + sigma_y ** 2)) <= 0.05

    dim = 4
    model = _gaussian_oracle(schedule, dim)
    y = np.array([2.0, -1.0, 0.5, 1.5])
    obs = Observation(y=y, operator=IdentityOperator(dim), condition_received=None)
    result = restore(model, schedule, obs, None, RestorationConfig(sigma_y=sigma_y, seed=5),
                     batch=500)
    bayes = y / (1.0 + sigma_y ** 2)
    assert np.linalg.norm(result.z0_hat.mean(axis=0) - bayes) <= 0.05 * np.linalg.norm(bayes)


def test_diagnostics_layout(short_schedule):
    model = _gaussian_oracle(short_schedule, 4)
    obs = Observation(y=np.ones(4), operator=IdentityOperator(4), condition_received=None)
    result = restore(model, short_schedule, obs, None, RestorationConfig(sigma_y=0.5, seed=0))
    assert result.lambdas.shape == (short_schedule.steps + 1,)
    assert np.isnan(result.lambdas[0])
    assert result.lambdas[1] == result.lambdas[2]
    assert result.gammas[1] == 0.0
    assert np.all(np.isfinite(result.residuals[1:]))


def test_divergence_is_reported_with_step(short_schedule):
    model = _NanDenoiser(short_schedule, 4)
    obs = Observation(y=np.ones(4), operator=IdentityOperator(4), condition_received=None)
    with pytest.raises(SamplerDivergenceError) as info:
        restore(model, short_schedule, obs, None, RestorationConfig(seed=0))
    assert info.value.step == short_schedule.steps


def test_replace_baseline_identity_returns_observation(short_schedule, rng):
    model = _gaussian_oracle(short_schedule, 6)
    y = rng.standard_normal(6)
    obs = Observation(y=y, operator=IdentityOperator(6), condition_received=None)
    result = replace_baseline(model, short_schedule, obs, None, RestorationConfig(seed=1))
    assert np.max(np.abs(result.z0_hat - y)) <= 1e-6
    assert np.all(np.isnan(result.lambdas))


def test_replace_baseline_keeps_observed_coordinates(oracle, note_prior):
    rng = np.random.default_rng(6)
    z0, labels = note_prior.sample(1, rng)
    A = MaskOperator(64, np.arange(0, 48))
    obs = Observation(y=A.apply(z0[0]), operator=A, condition_received=None)
    cond = Condition(embedding=note_prior.embeddings[labels[0]])
    result = replace_baseline(oracle, oracle.schedule, obs, cond, RestorationConfig(seed=2))
    assert np.array_equal(result.z0_hat[:48], z0[0][:48])
    assert np.all(np.isfinite(result.z0_hat[48:]))


def test_ancestral_sampling_matches_gaussian_prior(schedule):
    model = _gaussian_oracle(schedule, 4, mean=1.0, variance=0.25)
    samples = ancestral_sample(model, schedule, None, 0.0, np.random.default_rng(12), batch=2000)
    assert samples.shape == (2000, 4)
    assert np.allclose(samples.mean(axis=0), 1.0, atol=0.1)
    assert np.allclose(samples.var(axis=0), 0.25, rtol=0.2)


@pytest.mark.parametrize("sigma_y", [0.1, 1.0, 10.0])
def test_restore_diagnostics_satisfy_variance_contract(schedule, sigma_y):
    model = _gaussian_oracle(schedule, 4)
    A = MaskOperator(4, [0, 2])
    steps = np.arange(2, schedule.steps + 1)
    c = schedule.coef_z0[steps]
    for run in range(10):
        y = A.apply(np.random.default_rng(run).standard_normal(4))
        obs = Observation(y=y, operator=A, condition_received=None)
        result = restore(model, schedule, obs, None,
                         RestorationConfig(sigma_y=sigma_y, seed=100 + run))
        lam = result.lambdas[steps]
        gamma = result.gammas[steps]
        assert np.all(gamma >= 0.0)
        assert np.all((lam > 0.0) & (lam <= 1.0))
        assert np.max(np.abs((c * lam * sigma_y) ** 2 + gamma
                             - schedule.posterior_variances[steps])) <= 1e-12


def test_noise_free_masks_are_matched_exactly(note_prior, short_schedule):
    model = MixtureOracleDenoiser(note_prior, short_schedule)
    rng = np.random.default_rng(31)
    cfg = RestorationConfig(sigma_y=0.0)
    for trial in range(100):
        z0, labels = note_prior.sample(1, rng)
        kept = np.flatnonzero(rng.random(64) < rng.uniform(0.2, 0.9))
        A = MaskOperator(64, kept)
        obs = Observation(y=A.apply(z0[0]), operator=A, condition_received=None)
        cond = Condition(embedding=note_prior.embeddings[labels[0]])
        result = restore(model, short_schedule, obs, cond, cfg, rng)
        assert np.max(np.abs(result.z0_hat[kept] - z0[0][kept]), initial=0.0) <= 1e-6
        assert result.residuals[1] <= 1e-6


def test_exact_terminal_applies_full_correction(short_schedule):
    model = _gaussian_oracle(short_schedule, 6)
    A = MaskOperator(6, [1, 2, 4])
    y = A.apply(np.array([0.5, -1.0, 2.0, 0.3, 1.5, -0.7]))
    obs = Observation(y=y, operator=A, condition_received=None)
    cfg = RestorationConfig(sigma_y=0.5, exact_terminal=True, seed=8)
    result = restore(model, short_schedule, obs, None, cfg)
    assert result.lambdas[1] == 1.0
    assert result.lambdas[2] < 1.0
    assert np.max(np.abs(result.z0_hat[[1, 2, 4]] - y[[1, 2, 4]])) <= 1e-12
    assert result.residuals[1] <= 1e-12

    reused = restore(model, short_schedule, obs, None,
                     cfg.model_copy(update={"exact_terminal": False}))
    assert reused.lambdas[1] == reused.lambdas[2]


def test_null_space_keeps_schedule_noise_under_range_budget():
    s = build_linear_schedule(2, 1e-3, 0.2)
    model = _gaussian_oracle(s, 6)
    A = MaskOperator(6, [0, 1, 2])
    obs = Observation(y=A.apply(np.ones(6)), operator=A, condition_received=None)
    sigma_y = 10.0
    lam, gamma = lambda_gamma(s, 2, sigma_y)
    assert gamma < s.posterior_variances[2]

    ranged = restore(model, s, obs, None, RestorationConfig(sigma_y=sigma_y, seed=5))
    flat = restore(model, s, obs, None, RestorationConfig(
        sigma_y=sigma_y, seed=5, noise_budget=NoiseBudget.ISOTROPIC))

    # the single non-terminal step draws z_T first, then its injected noise
    draws = np.random.default_rng(5)
    draws.standard_normal(6)
    noise = draws.standard_normal(6)
    # at t = 1 the standard Gaussian posterior mean is sqrt(alpha_bar_1) z_1
    expected = np.sqrt(s.alpha_bars[1]) * (s.posterior_sigmas[2] - np.sqrt(gamma)) * noise
    assert np.allclose(ranged.z0_hat[:3], flat.z0_hat[:3], atol=1e-12)
    assert np.allclose(ranged.z0_hat[3:] - flat.z0_hat[3:], expected[3:], atol=1e-10)
    assert ranged.gammas[2] == flat.gammas[2] == gamma


def test_results_report_steps_taken(short_schedule):
    model = _gaussian_oracle(short_schedule, 4)
    obs = Observation(y=np.ones(4), operator=IdentityOperator(4), condition_received=None)
    cfg = RestorationConfig(sigma_y=0.1, seed=0)
    assert restore(model, short_schedule, obs, None, cfg).steps == short_schedule.steps
    assert replace_baseline(model, short_schedule, obs, None, cfg).steps == short_schedule.steps


def test_ancestral_sampling_collapses_onto_point_mass(schedule):
    mu = np.array([[0.4, -1.3, 2.2]])
    prior = GaussianMixturePrior(weights=np.ones(1), means=mu, variances=np.zeros((1, 3)))
    samples = ancestral_sample(MixtureOracleDenoiser(prior, schedule), schedule, None, 0.0,
                               np.random.default_rng(3), batch=50)
    assert np.max(np.abs(samples - mu)) <= 1e-3


@pytest.mark.parametrize("component", [0, 1])
def test_conditional_ancestral_samples_follow_the_condition(schedule, component):
    means = np.array([[2.0, 2.0, -2.0], [-2.0, -2.0, 2.0]])
    prior = GaussianMixturePrior(weights=np.full(2, 0.5), means=means,
                                 variances=np.full((2, 3), 0.1))
    samples = ancestral_sample(MixtureOracleDenoiser(prior, schedule), schedule,
                               Condition(component=component), 1.0,
                               np.random.default_rng(40 + component), batch=200)
    distances = np.linalg.norm(samples[:, None, :] - means[None], axis=2)
    assert np.mean(np.argmin(distances, axis=1) == component) >= 0.95


def test_symmetric_mixture_samples_are_centred(schedule):
    prior = GaussianMixturePrior(weights=np.full(2, 0.5),
                                 means=np.array([[1.0, -1.0], [-1.0, 1.0]]),
                                 variances=np.full((2, 2), 0.1))
    samples = ancestral_sample(MixtureOracleDenoiser(prior, schedule), schedule, None, 0.0,
                               np.random.default_rng(17), batch=1000)
    standard_error = samples.std(axis=0) / np.sqrt(samples.shape[0])
    assert np.all(np.abs(samples.mean(axis=0)) <= 3.0 * standard_error)
