import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_posterior, fd_gradient, random_fixture
from gppf.gp import (AdamConfig, FactorizationError, KernelHyperparams, TrainingSet, fit,
                     gram_matrix, log_marginal_likelihood, mll_gradient, predict,
                     rbf_kernel, train_hyperparameters)

N_FIXTURES = 20


# --- kernel -----------------------------------------------------------------

def test_kernel_zero_distance():
    hp = KernelHyperparams(0.7, 2.5, 0.0)
    assert rbf_kernel([0.3, -1.0], [0.3, -1.0], hp) == 2.5


def test_kernel_at_root_two_lengthscales():
    hp = KernelHyperparams(0.4, 1.0, 0.0)
    b = [0.4 * math.sqrt(2), 0.0]
    assert rbf_kernel([0, 0], b, hp) == pytest.approx(math.exp(-1), rel=1e-12)


def test_kernel_far_apart_is_negligible():
    hp = KernelHyperparams(0.5, 1.0, 0.0)
    assert rbf_kernel([0, 0], [10.0, 0], hp) < 1e-80


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       st.floats(0.05, 5), st.floats(0.05, 5))
def test_kernel_symmetric_and_bounded(xy, ell, sf):
    hp = KernelHyperparams(ell, sf, 0.0)
    a, b = xy[:2], xy[2:]
    k = rbf_kernel(a, b, hp)
    assert k == rbf_kernel(b, a, hp)
    assert 0 <= k <= sf


def test_invalid_hyperparams():
    with pytest.raises(ValueError):
        KernelHyperparams(0.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        KernelHyperparams(1.0, -1.0, 0.1)
    with pytest.raises(ValueError):
        KernelHyperparams(1.0, 1.0, -1e-9)


def test_gram_single_point():
    K = gram_matrix([[0.2, 0.1]], KernelHyperparams(1.0, 1.7, 0.0))
    assert K.shape == (1, 1) and K[0, 0] == 1.7


def test_gram_identical_points():
    K = gram_matrix([[1.0, 1.0], [1.0, 1.0]], KernelHyperparams(0.3, 0.9, 0.0))
    np.testing.assert_array_equal(K, np.full((2, 2), 0.9))


def test_gram_collinear_matches_scalar_kernel():
    hp = KernelHyperparams(0.8, 1.3, 0.0)
    pts = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
    K = gram_matrix(pts, hp)
    for i in range(3):
        for j in range(3):
            assert K[i, j] == pytest.approx(rbf_kernel(pts[i], pts[j], hp), rel=1e-14)
    assert K[0, 1] == pytest.approx(K[1, 2], rel=1e-14)
    np.testing.assert_array_equal(K, K.T)


# --- fit / predict -----------------------------------------------------------

def test_fit_single_point():
    hp = KernelHyperparams(1.0, 2.0, 0.0)
    model = fit(TrainingSet([[0.0, 0.0]], [3.0]), hp)
    assert model.alpha[0] == pytest.approx(3.0 / 2.0, rel=1e-15)


def test_fit_duplicated_inputs_is_rescued_or_fails_cleanly():
    train = TrainingSet([[0.5, 0.5], [0.5, 0.5]], [1.0, 1.0])
    try:
        model = fit(train, KernelHyperparams(1.0, 1.0, 0.0))
    except FactorizationError:
        return
    assert model.jitter > 0


def test_rank_one_gram_is_rescued_by_jitter():
    model = fit(TrainingSet([[0.0, 0.0]] * 3, [1.0, 2.0, 3.0]), KernelHyperparams(1, 1, 0))
    assert 0 < model.jitter <= 1e-2


def test_factorization_error_when_jitter_is_exhausted():
    from gppf.gp import _cholesky
    with pytest.raises(FactorizationError):
        _cholesky(-np.eye(3))


def test_fit_is_near_interpolating_with_small_noise(rng):
    x = rng.uniform(-1, 1, (5, 2))
    y = rng.standard_normal(5)
    hp = KernelHyperparams(0.6, 1.0, 1e-6)
    post = predict(fit(TrainingSet(x, y), hp), x)
    oracle, _ = dense_posterior(x, y, hp, x)
    np.testing.assert_allclose(post.mean, y, atol=1e-4)
    np.testing.assert_allclose(post.mean, oracle, atol=1e-8)


def test_chol_factor_reconstructs_gram(rng):
    train, hp = random_fixture(rng, n=12)
    model = fit(train, hp)
    K = gram_matrix(train.inputs, hp) + hp.noise_variance * np.eye(12)
    L = model.chol_factor
    assert np.linalg.norm(L @ L.T - K) / np.linalg.norm(K) < 1e-8
    np.testing.assert_array_equal(L, np.tril(L))


def test_prior_recovery_far_away(rng):
    train, hp = random_fixture(rng)
    far = train.inputs.mean(0) + 40 * hp.lengthscale
    post = predict(fit(train, hp), [far])
    assert abs(post.mean[0]) < 1e-12
    assert post.variance[0] == pytest.approx(hp.signal_variance, rel=1e-12)


def test_three_points_two_queries_match_dense_oracle():
    x = np.array([[0.0, 0.0], [0.5, -0.2], [-0.3, 0.8]])
    y = np.array([1.0, -0.5, 0.25])
    q = np.array([[0.1, 0.1], [-1.0, 0.4]])
    hp = KernelHyperparams(0.7, 1.4, 0.05)
    post = predict(fit(TrainingSet(x, y), hp), q)
    mean, var = dense_posterior(x, y, hp, q)
    np.testing.assert_allclose(post.mean, mean, atol=1e-12)
    np.testing.assert_allclose(post.variance, var, atol=1e-12)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_exact_interpolation(seed):
    rng = np.random.default_rng(seed)
    train, hp = random_fixture(rng, n=int(rng.integers(2, 9)), noise=0.0)
    hp = KernelHyperparams(min(hp.lengthscale, 0.5), hp.signal_variance, 0.0)
    post = predict(fit(train, hp), train.inputs)
    np.testing.assert_allclose(post.mean, train.observations, atol=1e-8)
    assert np.all(post.variance <= 1e-8)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_variance_bounds(seed):
    rng = np.random.default_rng(100 + seed)
    train, hp = random_fixture(rng)
    q = rng.uniform(-3, 3, (200, 2))
    post = predict(fit(train, hp), q)
    assert np.all(post.variance >= 0)
    assert np.all(post.variance <= hp.signal_variance)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_monotone_information(seed):
    rng = np.random.default_rng(200 + seed)
    train, hp = random_fixture(rng, n=20)
    q = rng.uniform(-2, 2, (50, 2))
    var = predict(fit(train, hp), q).variance
    extra = TrainingSet(np.vstack([train.inputs, rng.uniform(-1.5, 1.5, (1, 2))]),
                        np.append(train.observations, 0.3))
    var_more = predict(fit(extra, hp), q).variance
    assert np.all(var_more <= var + 1e-10)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_cholesky_predict_matches_dense_solve(seed):
    rng = np.random.default_rng(300 + seed)
    n = int(rng.integers(1, 26))
    train, hp = random_fixture(rng, n=n)
    q = rng.uniform(-2, 2, (30, 2))
    post = predict(fit(train, hp), q)
    mean, var = dense_posterior(train.inputs, train.observations, hp, q)
    np.testing.assert_allclose(post.mean, mean, atol=1e-8)
    np.testing.assert_allclose(post.variance, np.maximum(var, 0), atol=1e-8)


# --- marginal likelihood ----------------------------------------------------

def test_lml_one_point_zero_observation():
    val = log_marginal_likelihood(TrainingSet([[0, 0]], [0.0]), KernelHyperparams(1, 1, 0))
    assert val == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)
    assert val == pytest.approx(-0.918939, abs=1e-6)


def test_lml_one_point_unit_observation():
    val = log_marginal_likelihood(TrainingSet([[0, 0]], [1.0]), KernelHyperparams(1, 1, 0))
    assert val == pytest.approx(-1.418939, abs=1e-6)


def test_lml_matches_dense_formula(rng):
    train, hp = random_fixture(rng, n=10)
    A = gram_matrix(train.inputs, hp) + hp.noise_variance * np.eye(10)
    y = train.observations
    sign, logdet = np.linalg.slogdet(A)
    expected = -0.5 * y @ np.linalg.solve(A, y) - 0.5 * logdet - 5 * math.log(2 * math.pi)
    assert sign > 0
    assert log_marginal_likelihood(train, hp) == pytest.approx(expected, rel=1e-10)


def test_lml_permutation_invariant(rng):
    train, hp = random_fixture(rng, n=9)
    perm = rng.permutation(9)
    shuffled = TrainingSet(train.inputs[perm], train.observations[perm])
    assert log_marginal_likelihood(shuffled, hp) == pytest.approx(
        log_marginal_likelihood(train, hp), rel=1e-12)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(400 + seed)
    train, hp = random_fixture(rng, n=5 if seed < 5 else None)
    g = mll_gradient(train, hp)
    fd = fd_gradient(train, hp)
    rel = np.abs(g - fd) / np.maximum(np.abs(fd), 1e-8)
    assert np.all(rel < 1e-4), (g, fd)


def test_gradient_one_point_noise_component():
    hp = KernelHyperparams(1.0, 1.0, 0.25)
    train = TrainingSet([[0.0, 0.0]], [0.0])
    g = mll_gradient(train, hp)
    # L = -0.5 log(sf + sn) + const, so dL/dlog sn = -0.5 sn / (sf + sn)
    assert g[2] == pytest.approx(-0.5 * 0.25 / 1.25, rel=1e-12)
    assert g[0] == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(g, fd_gradient(train, hp), rtol=1e-6, atol=1e-10)


# --- training ---------------------------------------------------------------

def _gp_sample(rng, n=30, ell=0.5, noise=1e-4):
    x = rng.uniform(-2, 2, (n, 2))
    hp = KernelHyperparams(ell, 1.0, noise)
    K = gram_matrix(x, hp) + noise * np.eye(n)
    y = np.linalg.cholesky(K) @ rng.standard_normal(n)
    return TrainingSet(x, y)


@pytest.mark.parametrize("seed", range(5))
def test_training_recovers_lengthscale(seed):
    train = _gp_sample(np.random.default_rng(500 + seed))
    hp = train_hyperparameters(train, KernelHyperparams(1.0, 1.0, 0.01))
    assert 0.25 <= hp.lengthscale <= 1.0


@pytest.mark.parametrize("seed", range(10))
def test_training_never_lowers_lml(seed):
    train, hp0 = random_fixture(np.random.default_rng(600 + seed))
    hp = train_hyperparameters(train, hp0)
    assert log_marginal_likelihood(train, hp) >= log_marginal_likelihood(train, hp0)


def test_training_reaches_stationary_point():
    train = _gp_sample(np.random.default_rng(7), n=25, ell=0.7, noise=1e-2)
    hp = train_hyperparameters(train, KernelHyperparams(1.0, 1.0, 0.01),
                               AdamConfig(iterations=3000, learning_rate=0.02))
    assert np.linalg.norm(mll_gradient(train, hp)) < 1e-3


def test_zero_learning_rate_is_a_no_op(rng):
    train, hp0 = random_fixture(rng)
    hp = train_hyperparameters(train, hp0, AdamConfig(iterations=100, learning_rate=0.0))
    assert hp.lengthscale == pytest.approx(hp0.lengthscale, rel=1e-14)
    assert hp.signal_variance == pytest.approx(hp0.signal_variance, rel=1e-14)
    assert hp.noise_variance == pytest.approx(hp0.noise_variance, rel=1e-14)


def test_zero_iterations_returns_init(rng):
    train, hp0 = random_fixture(rng)
    hp = train_hyperparameters(train, hp0, AdamConfig(iterations=0))
    assert hp.lengthscale == pytest.approx(hp0.lengthscale, rel=1e-14)


def test_log_space_roundtrip():
    hp = KernelHyperparams(0.3, 4.0, 1e-3)
    back = KernelHyperparams.from_log(hp.to_log())
    assert back.lengthscale == pytest.approx(0.3, rel=1e-15)
    assert back.noise_variance == pytest.approx(1e-3, rel=1e-15)


def test_noise_floor_binds_on_noiseless_data():
    x = np.linspace(-1, 1, 12)[:, None] * [1.0, 0.5]
    train = TrainingSet(x, (x ** 2).sum(1))
    hp = train_hyperparameters(train, KernelHyperparams(), AdamConfig(noise_floor=1e-4))
    assert hp.noise_variance == pytest.approx(1e-4, rel=1e-12)
    free = train_hyperparameters(train, KernelHyperparams(), AdamConfig(noise_floor=0.0))
    assert free.noise_variance < 1e-4
    with pytest.raises(ValueError):
        AdamConfig(noise_floor=-1.0)
