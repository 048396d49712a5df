"""
Exact Gaussian process regression with an isotropic RBF kernel.

The model has a zero prior mean and three hyperparameters (lengthscale,
signal variance, observation-noise variance). Inference goes through a
Cholesky factor of ``K + noise_variance * I``; hyperparameters are trained by
Adam ascent of the log marginal likelihood in log-parameter space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

__all__ = [
    "AdamConfig",
    "FactorizationError",
    "FittedModel",
    "KernelHyperparams",
    "Posterior",
    "TrainingSet",
    "cross_covariance",
    "fit",
    "gram_matrix",
    "log_marginal_likelihood",
    "mll_gradient",
    "predict",
    "rbf_kernel",
    "train_hyperparameters",
]

LOG_2PI = np.log(2.0 * np.pi)

# jitter schedule, relative to mean(diag K)
JITTER_START = 1e-8
JITTER_MAX = 1e-2

# round-off tolerance for negative predictive variances, per unit of signal variance
VARIANCE_CLAMP_TOL = 1e-8

# log-space floor for a zero noise variance
_LOG_FLOOR = np.log(1e-300)


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky failed even after the maximum diagonal jitter."""


@dataclass(frozen=True)
class KernelHyperparams:
    lengthscale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 0.01

    def __post_init__(self):
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.signal_variance > 0:
            raise ValueError(
                f"signal_variance must be positive, got {self.signal_variance}")
        if not self.noise_variance >= 0:
            raise ValueError(
                f"noise_variance must be non-negative, got {self.noise_variance}")

    def to_log(self) -> np.ndarray:
        """Log-parameters ``(log lengthscale, log signal_variance, log noise_variance)``."""
        noise = np.log(self.noise_variance) if self.noise_variance > 0 else _LOG_FLOOR
        return np.array([np.log(self.lengthscale), np.log(self.signal_variance), noise])

    @classmethod
    def from_log(cls, theta) -> "KernelHyperparams":
        theta = np.asarray(theta, dtype=float)
        return cls(*(float(v) for v in np.exp(theta)))


@dataclass(frozen=True)
class TrainingSet:
    inputs: np.ndarray
    observations: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.observations, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise ValueError(
                f"{x.shape[0]} inputs but {y.shape[0]} observations")
        if y.shape[0] < 1:
            raise ValueError("training set is empty")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "observations", y)

    def __len__(self):
        return self.observations.shape[0]


@dataclass(frozen=True)
class FittedModel:
    training_set: TrainingSet
    hyperparams: KernelHyperparams
    chol_factor: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0


@dataclass(frozen=True)
class Posterior:
    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class AdamConfig:
    """
    Adam settings for hyperparameter training. ``noise_floor`` is a lower
    bound on the trained noise variance (0 disables it); without it,
    noiseless data drive the noise to zero and the Gram matrix to the
    edge of singularity.
    """
    iterations: int = 100
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    noise_floor: float = 1e-4

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.noise_floor < 0:
            raise ValueError("noise_floor must be non-negative")


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def rbf_kernel(a, b, hp: KernelHyperparams) -> float:
    """
    Squared exponential covariance between two planar points,

        k(a, b) = signal_variance * exp(-|a - b|^2 / (2 lengthscale^2))
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(hp.signal_variance * np.exp(-0.5 * np.dot(d, d) / hp.lengthscale ** 2))


def cross_covariance(a, b, hp: KernelHyperparams) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return hp.signal_variance * np.exp(-0.5 * _sqdist(a, b) / hp.lengthscale ** 2)


def gram_matrix(points, hp: KernelHyperparams) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise ValueError("gram_matrix needs at least one point")
    K = cross_covariance(points, points, hp)
    # exact symmetry and diagonal regardless of einsum round-off
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, hp.signal_variance)
    return K


def _cholesky(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``A``, escalating diagonal jitter on failure."""
    L, info = lapack.dpotrf(A, lower=1, clean=1)
    if info == 0:
        return L, 0.0
    scale = float(np.mean(np.diag(A)))
    jitter = JITTER_START * scale
    while jitter <= JITTER_MAX * scale * (1 + 1e-12):
        L, info = lapack.dpotrf(A + jitter * np.eye(A.shape[0]), lower=1, clean=1)
        if info == 0:
            return L, jitter
        jitter *= 2.0
    raise FactorizationError(
        f"Cholesky failed with jitter up to {JITTER_MAX:g} * mean(diag K); "
        "inputs are likely duplicated with zero noise")


def fit(train: TrainingSet, hp: KernelHyperparams) -> FittedModel:
    K = gram_matrix(train.inputs, hp)
    K[np.diag_indices_from(K)] += hp.noise_variance
    L, jitter = _cholesky(K)
    alpha = lapack.dpotrs(L, train.observations, lower=1)[0]
    return FittedModel(train, hp, L, alpha, jitter)


def predict(model: FittedModel, queries) -> Posterior:
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    hp = model.hyperparams
    Ks = cross_covariance(queries, model.training_set.inputs, hp)
    mean = Ks @ model.alpha
    v = solve_triangular(model.chol_factor, Ks.T, lower=True, check_finite=False)
    var = hp.signal_variance - np.einsum("ij,ij->j", v, v)
    worst = var.min(initial=0.0)
    if worst < -VARIANCE_CLAMP_TOL * max(1.0, hp.signal_variance):
        raise ArithmeticError(
            f"predictive variance {worst:.3e} is negative beyond round-off")
    return Posterior(mean, np.maximum(var, 0.0))


def _mll_terms(sqd: np.ndarray, y: np.ndarray, theta: np.ndarray,
               need_grad: bool = True):
    ell2, sf, sn = np.exp(2.0 * theta[0]), np.exp(theta[1]), np.exp(theta[2])
    Kf = sf * np.exp(-0.5 * sqd / ell2)
    K = Kf.copy()
    K[np.diag_indices_from(K)] += sn
    L, _ = _cholesky(K)
    alpha = lapack.dpotrs(L, y, lower=1)[0]
    mll = -0.5 * y @ alpha - np.log(np.diag(L)).sum() - 0.5 * y.size * LOG_2PI
    if not need_grad:
        return mll, None
    Kinv = lapack.dpotri(L, lower=1)[0]
    Kinv = np.tril(Kinv) + np.tril(Kinv, -1).T
    W = np.outer(alpha, alpha) - Kinv
    WKf = W * Kf
    grad = np.array([
        0.5 * np.sum(WKf * sqd) / ell2,
        0.5 * np.sum(WKf),
        0.5 * sn * np.trace(W),
    ])
    return mll, grad


def log_marginal_likelihood(train: TrainingSet, hp: KernelHyperparams) -> float:
    sqd = _sqdist(train.inputs, train.inputs)
    return float(_mll_terms(sqd, train.observations, hp.to_log(), need_grad=False)[0])


def mll_gradient(train: TrainingSet, hp: KernelHyperparams) -> np.ndarray:
    """
    Gradient of the log marginal likelihood with respect to
    ``(log lengthscale, log signal_variance, log noise_variance)``.

    Uses the trace form ``0.5 * tr((alpha alpha^T - K^-1) dK/dtheta)``.
    """
    sqd = _sqdist(train.inputs, train.inputs)
    return _mll_terms(sqd, train.observations, hp.to_log())[1]


def train_hyperparameters(train: TrainingSet, init: KernelHyperparams,
                          config: AdamConfig = AdamConfig()) -> KernelHyperparams:
    """
    Run exactly ``config.iterations`` Adam steps ascending the log marginal
    likelihood, starting from ``init``.

    An iterate that cannot be factorized even with maximal jitter is
    rejected and the walk resumes from the last iterate that could. Each
    step is projected onto ``noise_variance >= config.noise_floor``.
    """
    sqd = _sqdist(train.inputs, train.inputs)
    y = train.observations
    theta = good = init.to_log()
    m = np.zeros(3)
    v = np.zeros(3)
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.eps
    log_floor = np.log(config.noise_floor) if config.noise_floor > 0 else -np.inf
    for t in range(1, config.iterations + 1):
        try:
            _, g = _mll_terms(sqd, y, theta)
        except FactorizationError:
            if theta is good:
                raise
            theta = good
            _, g = _mll_terms(sqd, y, theta)
        good = theta
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        proposal = theta + lr * mhat / (np.sqrt(vhat) + eps)
        proposal[2] = max(proposal[2], log_floor)
        if np.all(np.isfinite(proposal)):
            theta = proposal
    return KernelHyperparams.from_log(theta)
