"""Gaussian process basics: condition, predict, fit, leave-one-out.

Run:  python3 demos/01_gp_regression.py
"""

import numpy as np

from tlbo import FitConfig, condition, fit_hyperparameters, log_marginal_likelihood
from tlbo import loo_predictions, predict, se

rng = np.random.default_rng(0)

# noisy observations of a smooth 1-D function
X = np.sort(rng.uniform(-3, 3, size=25))[:, None]
y = np.sin(X[:, 0]) + 0.1 * rng.standard_normal(25)

# fit kernel + noise by maximizing the log marginal likelihood
result = fit_hyperparameters(X, y, "se", FitConfig(seed=1))
print("fitted kernel:", result.kernel)
print("fitted noise variance:", f"{result.noise_variance:.4g}")
print("log marginal likelihood:", f"{result.log_marginal_likelihood:.3f}")

model = condition(X, y, result.kernel, result.noise_variance)
value, grad = log_marginal_likelihood(model)
print("gradient inf-norm at the fit:", f"{np.abs(grad).max():.2e}")

# posterior on a grid
Xs = np.linspace(-3, 3, 7)[:, None]
post = predict(model, Xs)
print("\n  x      truth   posterior mean   posterior std")
for xq, mu, sd in zip(Xs[:, 0], post.mean, post.std):
    print(f"{xq:+5.2f}   {np.sin(xq):+6.3f}   {mu:+14.3f}   {sd:13.3f}")

# leave-one-out predictions come from one factorization, not N refits
loo = loo_predictions(model)
worst = np.argmax(np.abs(loo.mean - y))
print("\nLOO worst held-out residual:", f"{loo.mean[worst] - y[worst]:+.3f}",
      "at x =", f"{X[worst, 0]:+.2f}")

# a model with a fixed kernel for comparison
fixed = condition(X, y, se(1.0, 1.0), 0.01)
print("fixed-kernel LML:", f"{log_marginal_likelihood(fixed)[0]:.3f}",
      "(fit should be at least as good)")
