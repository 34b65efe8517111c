"""Gaussian process regression on top of a Cholesky factorization.

Conditioning, posterior prediction, the log marginal likelihood with its
gradient in log-hyperparameter space, multi-start hyperparameter fitting,
and closed-form leave-one-out predictions.  Models are immutable once
conditioned and safe to share across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .kernels import (
    KernelSpec,
    kernel_diag,
    kernel_matrix,
    kernel_matrix_with_grads,
    log_params,
    template_kernel,
    with_log_params,
)

__all__ = [
    "GpConditioningError",
    "Posterior",
    "GpModel",
    "condition",
    "predict",
    "log_marginal_likelihood",
    "FitConfig",
    "FitResult",
    "fit_hyperparameters",
    "loo_predictions",
]

# Jitter escalation: start at 1e-10 * trace(K)/N, multiply by 10 until
# 1e-4 * trace(K)/N, then give up.
_JITTER_START = 1e-10
_JITTER_MAX = 1e-4

_NEG_VAR_TOL = -1e-10


class GpConditioningError(RuntimeError):
    """Kernel matrix could not be factorized even with maximal jitter."""


@dataclass(frozen=True)
class Posterior:
    """Posterior mean and variance at query points.

    ``covariance`` is populated only when a full covariance was requested.
    Variances are validated against a -1e-10 floor and clamped to zero.
    """

    mean: np.ndarray
    variance: np.ndarray
    covariance: np.ndarray | None = None

    def __post_init__(self):
        var = np.asarray(self.variance, dtype=float)
        if np.any(var < _NEG_VAR_TOL):
            raise FloatingPointError(
                f"posterior variance below tolerance: min={var.min():.3e}"
            )
        object.__setattr__(self, "variance", np.maximum(var, 0.0))

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


@dataclass(frozen=True)
class GpModel:
    """A conditioned Gaussian process.

    Holds the kernel, homoscedastic noise variance, training data, the
    lower-triangular factor ``L`` of ``K + (noise + jitter) I`` and the
    solved vector ``alpha = (K + noise I)^-1 (y - prior_mean)``.
    """

    kernel: KernelSpec
    noise_variance: float
    train_inputs: np.ndarray
    train_targets: np.ndarray
    prior_mean: float
    factor: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0

    @property
    def n_points(self) -> int:
        return self.train_inputs.shape[0]

    @property
    def n_dims(self) -> int:
        return self.train_inputs.shape[1]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _chol_with_jitter(K: np.ndarray, noise_variance: float):
    """Lower Cholesky factor of K + noise*I, escalating jitter on failure."""
    n = K.shape[0]
    base = K + noise_variance * np.eye(n)
    try:
        return cholesky(base, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    unit = np.trace(K) / n
    jitter = _JITTER_START * unit
    while jitter <= _JITTER_MAX * unit:
        try:
            return cholesky(base + jitter * np.eye(n), lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise GpConditioningError(
        "kernel matrix is not positive definite; jitter escalated from "
        f"{_JITTER_START:g}*trace(K)/N to {_JITTER_MAX:g}*trace(K)/N "
        "without a successful factorization"
    )


def condition(
    X,
    y,
    kernel: KernelSpec,
    noise_variance: float,
    prior_mean: float = 0.0,
) -> GpModel:
    """Condition a GP on training data ``(X, y)``.

    Parameters
    ----------
    X : array_like, shape (N, n)
    y : array_like, shape (N,)
    kernel : KernelSpec
    noise_variance : float
        Homoscedastic observation noise variance, >= 0.
    prior_mean : float
        Constant prior mean (0 in standardized output space).

    Raises
    ------
    GpConditioningError
        If the kernel matrix cannot be factorized even after the jitter
        escalation, or on duplicate inputs with zero noise.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError("X and y disagree on the number of points")
    if X.shape[0] < 1:
        raise ValueError("at least one training point required")
    if noise_variance < 0:
        raise ValueError("noise_variance must be >= 0")
    if noise_variance == 0.0 and X.shape[0] > 1:
        # An exactly singular K would be masked by jitter; enforce the
        # no-duplicates precondition explicitly.
        _, counts = np.unique(X, axis=0, return_counts=True)
        if np.any(counts > 1):
            raise GpConditioningError(
                "duplicate training inputs with zero noise variance make the "
                "kernel matrix singular; jitter policy cannot recover an "
                "interpolating model"
            )
    K = kernel_matrix(kernel, X)
    L, jitter = _chol_with_jitter(K, noise_variance)
    alpha = cho_solve((L, True), y - prior_mean)
    return GpModel(
        kernel=kernel,
        noise_variance=float(noise_variance),
        train_inputs=_readonly(X),
        train_targets=_readonly(y),
        prior_mean=float(prior_mean),
        factor=_readonly(L),
        alpha=_readonly(alpha),
        jitter=float(jitter),
    )


def _forgive_rounding(var: np.ndarray, scale: float) -> np.ndarray:
    """Zero out negative variances that are rounding noise at this scale."""
    tol = _NEG_VAR_TOL * max(1.0, scale)
    return np.where((var < 0) & (var >= tol), 0.0, var)


def predict(model: GpModel, X_star, full_cov: bool = False) -> Posterior:
    """Posterior mean and (co)variance at query points ``X_star``.

    mean = prior + K_*^T alpha, cov = K_** - K_*^T (K + noise I)^-1 K_*.
    """
    X_star = np.atleast_2d(np.asarray(X_star, dtype=float))
    if X_star.shape[1] != model.n_dims:
        raise ValueError(
            f"query dimension {X_star.shape[1]} does not match model "
            f"dimension {model.n_dims}"
        )
    K_star = kernel_matrix(model.kernel, model.train_inputs, X_star)
    mean = model.prior_mean + K_star.T @ model.alpha
    v = solve_triangular(model.factor, K_star, lower=True)
    prior_var = model.kernel.total_signal_variance
    if full_cov:
        K_ss = kernel_matrix(model.kernel, X_star)
        cov = K_ss - v.T @ v
        var = _forgive_rounding(np.diag(cov).copy(), prior_var)
        return Posterior(mean=mean, variance=var, covariance=cov)
    var = kernel_diag(model.kernel, X_star) - np.sum(v * v, axis=0)
    return Posterior(mean=mean, variance=_forgive_rounding(var, prior_var))


def log_marginal_likelihood(model: GpModel):
    """Log marginal likelihood and its gradient in log-hyperparameter space.

    Returns
    -------
    value : float
        -1/2 r^T a - 1/2 log det(K + noise I) - N/2 log(2 pi) with
        r = y - prior_mean and a = (K + noise I)^-1 r.
    grad : ndarray
        Derivatives w.r.t. the kernel log parameters (leaf order) followed
        by log noise variance.
    """
    r = model.train_targets - model.prior_mean
    n = model.n_points
    value = (
        -0.5 * float(r @ model.alpha)
        - float(np.sum(np.log(np.diag(model.factor))))
        - 0.5 * n * np.log(2.0 * np.pi)
    )
    K_inv = cho_solve((model.factor, True), np.eye(n))
    A = np.outer(model.alpha, model.alpha) - K_inv
    _, dKs = kernel_matrix_with_grads(model.kernel, model.train_inputs)
    grad = [0.5 * float(np.sum(A * dK)) for dK in dKs]
    # d(K + sn2 I)/d log sn2 = sn2 I
    grad.append(0.5 * model.noise_variance * float(np.trace(A)))
    return value, np.array(grad)


@dataclass(frozen=True)
class FitConfig:
    """Multi-start settings for marginal-likelihood hyperparameter fitting.

    The first start is the geometric center of the init ranges, the rest
    are drawn log-uniformly.  Optimization runs in log space under bound
    constraints; convergence when the projected gradient inf-norm drops
    below ``grad_tol``.
    """

    n_starts: int = 5
    max_iter: int = 200
    grad_tol: float = 1e-5
    length_scale_init: tuple[float, float] = (0.1, 2.0)
    signal_variance_init: tuple[float, float] = (0.1, 5.0)
    noise_variance_init: tuple[float, float] = (1e-6, 0.1)
    # bounds assume normalized inputs and standardized outputs; they keep
    # noise-free fits off the large-variance/large-length-scale ridge
    length_scale_bounds: tuple[float, float] = (1e-2, 1e2)
    signal_variance_bounds: tuple[float, float] = (1e-4, 50.0)
    noise_variance_bounds: tuple[float, float] = (1e-9, 1.0)
    seed: int = 0


@dataclass(frozen=True)
class FitResult:
    kernel: KernelSpec
    noise_variance: float
    log_marginal_likelihood: float
    converged: bool


def _init_ranges(spec: KernelSpec, config: FitConfig):
    """Per-parameter (init_lo, init_hi, bound_lo, bound_hi) rows."""
    rows = []
    for leaf in spec.leaves:
        rows.append(config.signal_variance_init + config.signal_variance_bounds)
        for _ in leaf.length_scales:
            rows.append(config.length_scale_init + config.length_scale_bounds)
    rows.append(config.noise_variance_init + config.noise_variance_bounds)
    return np.array(rows)


def fit_hyperparameters(
    X,
    y,
    kernel_family: str | KernelSpec = "se+matern25",
    config: FitConfig | None = None,
    prior_mean: float = 0.0,
) -> FitResult:
    """Fit kernel and noise hyperparameters by maximizing the LML.

    ``kernel_family`` is a family name understood by
    :func:`tlbo.kernels.template_kernel` or an explicit template spec whose
    structure (not values) is kept.  Returns the best point over all starts
    and all initializations; ``converged`` is False if no start satisfied
    the gradient tolerance.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] < 2:
        raise ValueError("hyperparameter fitting needs at least 2 points")
    config = config or FitConfig()
    if isinstance(kernel_family, KernelSpec):
        template = kernel_family
    else:
        template = template_kernel(kernel_family, X.shape[1])

    ranges = _init_ranges(template, config)
    log_init_lo, log_init_hi = np.log(ranges[:, 0]), np.log(ranges[:, 1])
    bounds = list(zip(np.log(ranges[:, 2]), np.log(ranges[:, 3])))

    def objective(theta):
        spec = with_log_params(template, theta[:-1])
        sn2 = float(np.exp(theta[-1]))
        try:
            model = condition(X, y, spec, sn2, prior_mean)
        except GpConditioningError:
            return 1e25, np.zeros_like(theta)
        value, grad = log_marginal_likelihood(model)
        if not np.isfinite(value):
            return 1e25, np.zeros_like(theta)
        return -value, -grad

    rng = np.random.default_rng(config.seed)
    center = 0.5 * (log_init_lo + log_init_hi)
    starts = [center]
    for _ in range(config.n_starts - 1):
        starts.append(rng.uniform(log_init_lo, log_init_hi))

    best_theta, best_value, converged = None, np.inf, False
    for theta0 in starts:
        f0, _ = objective(theta0)
        if f0 < best_value:
            best_value, best_theta = f0, theta0
        res = minimize(
            objective,
            theta0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": config.max_iter, "gtol": config.grad_tol},
        )
        if np.isfinite(res.fun) and res.fun < best_value:
            best_value, best_theta = res.fun, res.x
        converged = converged or bool(res.success)

    if not converged:
        warnings.warn(
            "no hyperparameter start converged; returning best evaluated point",
            RuntimeWarning,
        )
    kernel = with_log_params(template, best_theta[:-1])
    return FitResult(
        kernel=kernel,
        noise_variance=float(np.exp(best_theta[-1])),
        log_marginal_likelihood=-best_value,
        converged=converged,
    )


def loo_predictions(model: GpModel) -> Posterior:
    """Leave-one-out posterior at each training input.

    Entry i equals the prediction of a model conditioned on all points
    except i, evaluated at x_i, via the rank-reduction identity on the
    precision matrix (one O(N^3) solve instead of N refits).
    """
    n = model.n_points
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 training points")
    K_inv = cho_solve((model.factor, True), np.eye(n))
    diag = np.diag(K_inv)
    mean = model.train_targets - model.alpha / diag
    # 1/diag is the held-out predictive variance of y_i; subtract the noise
    # (and any jitter folded into the factorization) to get the latent f_i.
    var = 1.0 / diag - model.noise_variance - model.jitter
    var = _forgive_rounding(var, model.kernel.total_signal_variance)
    return Posterior(mean=mean, variance=var)
