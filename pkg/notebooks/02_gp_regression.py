# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     name: python3
# ---

# # Exact GP regression on a handful of samples
#
# The learner is a zero-mean GP with an isotropic RBF kernel. It has three
# hyperparameters: lengthscale, signal variance and noise variance. We fit
# it to ten noisy Parabola samples and then train the hyperparameters.

# +
import numpy as np

from gppf import (AdamConfig, KernelHyperparams, TrainingSet, build_parabola, fit,
                  log_marginal_likelihood, predict, train_hyperparameters)
from gppf.surfaces import measure

surface = build_parabola()
rng = np.random.default_rng(1)
idx = rng.choice(surface.n_points, 10, replace=False)
train = TrainingSet(surface.positions[idx], [measure(surface, k, rng) for k in idx])
# -

init = KernelHyperparams()  # lengthscale 1, signal variance 1, noise 0.01
print("log marginal likelihood at init:", log_marginal_likelihood(train, init))

# Adam runs in log-parameter space, 100 steps at learning rate 0.1 by default.

hp = train_hyperparameters(train, init, AdamConfig())
print(hp)
print("after training:", log_marginal_likelihood(train, hp))


def rmse(h):
    post = predict(fit(train, h), surface.positions)
    return np.sqrt(np.mean((post.mean - surface.target) ** 2))


print(f"global RMSE: init {rmse(init):.4f}, trained {rmse(hp):.4f}")

# The predictive variance is lowest at the samples and grows away from
# them. It only nears the signal variance several lengthscales out, which
# here lies beyond the grid.

post = predict(fit(train, hp), surface.positions)
far = np.argmax(np.min(np.linalg.norm(surface.positions[:, None] - train.inputs, axis=2),
                       axis=1))
print("variance at a sample:", post.variance[idx[0]])
print("variance at the farthest grid point:", post.variance[far], "prior:", hp.signal_variance)

# With noiseless data the trained noise would collapse toward zero and the
# Gram matrix would become nearly singular, so training keeps the noise
# variance above `AdamConfig.noise_floor`, which defaults to 1e-4.

exact = TrainingSet(train.inputs, surface.target[idx])
print(train_hyperparameters(exact, init).noise_variance)
