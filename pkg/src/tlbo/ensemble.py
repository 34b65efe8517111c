"""Ranking-loss weighted ensemble of per-task Gaussian processes.

Each source GP lives in its own normalized space but is queried at the
target-normalized coordinate, so all models share one input space in which
source optima and the target start point sit near the origin.  Ensemble
weights come from posterior sampling: every draw awards its mass to the
model(s) with the lowest ranking loss against the observed target outputs,
and a linearly growing lower bound can be forced onto the target weight to
stop the rank-only loss from drowning out fresh target evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gp import GpModel, Posterior, loo_predictions, predict

__all__ = [
    "Schedule",
    "EnsembleState",
    "ranking_loss",
    "ranking_loss_batch",
    "model_losses",
    "sample_loss_matrix",
    "weights_from_losses",
    "compute_weights",
    "force_target_weight",
    "ensemble_predict",
]

# Posterior spread below this is treated as degenerate: samples collapse to
# the posterior mean instead of relying on a near-singular factorization.
_DEGENERATE_VAR = 1e-12


@dataclass(frozen=True)
class Schedule:
    """Forced target-weight schedule: lower bound min(a0*i + a1, beta)."""

    alpha0: float = 0.1
    alpha1: float = 0.1
    beta: float = 0.95

    def __post_init__(self):
        if self.alpha0 < 0 or self.alpha1 < 0:
            raise ValueError("schedule slopes must be >= 0")
        if not 0 < self.beta <= 1:
            raise ValueError("peak weight beta must lie in (0, 1]")

    def floor_at(self, iteration: int) -> float:
        return min(self.alpha0 * iteration + self.alpha1, self.beta)

    def to_dict(self) -> dict:
        return {"alpha0": self.alpha0, "alpha1": self.alpha1, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        return cls(float(d["alpha0"]), float(d["alpha1"]), float(d["beta"]))


@dataclass(frozen=True)
class EnsembleState:
    """One iteration's weighted ensemble: sources in order, target last."""

    models: tuple[GpModel, ...]
    weights: np.ndarray
    raw_losses: np.ndarray
    n_observations: int
    iteration: int
    schedule: Schedule | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        losses = np.asarray(self.raw_losses, dtype=int)
        if w.size != len(self.models) or losses.size != len(self.models):
            raise ValueError("weights and losses must have one entry per model")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must lie on the simplex")
        cap = self.n_observations * (self.n_observations - 1)
        if np.any(losses < 0) or np.any(losses > cap):
            raise ValueError(f"ranking losses must lie in [0, {cap}]")
        w.setflags(write=False)
        losses.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "raw_losses", losses)

    @property
    def target_weight(self) -> float:
        return float(self.weights[-1])

    def predict(self, X_norm):
        return ensemble_predict(list(self.models), self.weights, X_norm)


def ranking_loss(predictions, targets) -> int:
    """Count ordered pairs whose predicted and observed orderings disagree.

    Over all ordered pairs (j, k): XOR(predictions_j < predictions_k,
    targets_j < targets_k).  Comparisons are strict, so ties on both sides
    contribute nothing and the diagonal is always zero.  Invariant under
    strictly increasing transforms of either argument.
    """
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(targets, dtype=float).ravel()
    if p.size != t.size:
        raise ValueError("predictions and targets must have equal length")
    return int(np.sum((p[:, None] < p[None, :]) ^ (t[:, None] < t[None, :])))


def ranking_loss_batch(prediction_rows, targets) -> np.ndarray:
    """Ranking loss of each row of ``prediction_rows`` against ``targets``."""
    P = np.atleast_2d(np.asarray(prediction_rows, dtype=float))
    t = np.asarray(targets, dtype=float).ravel()
    less_p = P[:, :, None] < P[:, None, :]
    less_t = t[:, None] < t[None, :]
    return np.sum(less_p ^ less_t[None, :, :], axis=(1, 2)).astype(int)


def model_losses(
    source_models: list[GpModel],
    target_model: GpModel,
    target_inputs_norm,
    target_outputs_norm,
) -> np.ndarray:
    """Posterior-mean ranking losses, sources first, target last.

    Source entries evaluate each source GP's posterior mean at the
    target-normalized inputs; the target entry uses leave-one-out means so
    the target model cannot score its own interpolation.
    """
    X = np.atleast_2d(np.asarray(target_inputs_norm, dtype=float))
    y = np.asarray(target_outputs_norm, dtype=float).ravel()
    if X.shape[0] < 2:
        raise ValueError("model losses need at least 2 target observations")
    losses = [ranking_loss(predict(m, X).mean, y) for m in source_models]
    losses.append(ranking_loss(loo_predictions(target_model).mean, y))
    return np.asarray(losses, dtype=int)


def _source_sampler(model: GpModel, X):
    """Mean and a sampling factor of the joint posterior at X (or None)."""
    post = predict(model, X, full_cov=True)
    if float(np.max(post.variance, initial=0.0)) <= _DEGENERATE_VAR:
        return post.mean, None
    cov = post.covariance + _DEGENERATE_VAR * np.eye(X.shape[0])
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return post.mean, None
    return post.mean, L


def sample_loss_matrix(
    source_models: list[GpModel],
    target_model: GpModel,
    target_inputs_norm,
    target_outputs_norm,
    sample_count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Ranking losses of posterior draws, shape (sample_count, M + 1).

    Each source contributes joint posterior function draws at the target
    inputs; the target contributes independent draws from its leave-one-out
    posteriors.  Degenerate posteriors fall back to their means.  The draw
    order (sources in order, then the target) is fixed so a given generator
    state always yields the same matrix.
    """
    X = np.atleast_2d(np.asarray(target_inputs_norm, dtype=float))
    y = np.asarray(target_outputs_norm, dtype=float).ravel()
    n_t = X.shape[0]
    S = int(sample_count)
    losses = np.zeros((S, len(source_models) + 1), dtype=int)
    for m, model in enumerate(source_models):
        mean, L = _source_sampler(model, X)
        z = rng.standard_normal((n_t, S))
        draws = mean[None, :] if L is None else mean[None, :] + (L @ z).T
        losses[:, m] = ranking_loss_batch(np.broadcast_to(draws, (S, n_t)), y)
    loo = loo_predictions(target_model)
    z = rng.standard_normal((n_t, S))
    draws = loo.mean[None, :] + (loo.std[:, None] * z).T
    losses[:, -1] = ranking_loss_batch(draws, y)
    return losses


def weights_from_losses(loss_matrix) -> np.ndarray:
    """Award each draw's mass 1/S uniformly among its argmin models."""
    L = np.atleast_2d(np.asarray(loss_matrix))
    S, n_models = L.shape
    is_min = L == L.min(axis=1, keepdims=True)
    per_draw = is_min / is_min.sum(axis=1, keepdims=True)
    return per_draw.sum(axis=0) / S


def compute_weights(
    source_models: list[GpModel],
    target_model: GpModel,
    target_inputs_norm,
    target_outputs_norm,
    sample_count: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """Simplex weights (sources..., target) from sampled ranking losses."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    losses = sample_loss_matrix(
        source_models, target_model, target_inputs_norm, target_outputs_norm,
        sample_count, rng,
    )
    return weights_from_losses(losses)


def force_target_weight(weights, iteration: int, schedule: Schedule) -> np.ndarray:
    """Raise the target weight (last entry) to its scheduled lower bound.

    Source weights are rescaled proportionally so the result stays on the
    simplex; the target weight never decreases.
    """
    w = np.asarray(weights, dtype=float).copy()
    w_t = w[-1]
    forced = max(w_t, schedule.floor_at(iteration))
    if w_t >= 1.0:
        w[:-1] = 0.0
    else:
        w[:-1] *= (1.0 - forced) / (1.0 - w_t)
    w[-1] = forced
    return w


def ensemble_predict(models: list[GpModel], weights, X_norm) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mixture prediction: mean = sum w_i mu_i, var = sum w_i^2 s_i^2.

    Models carrying zero weight are skipped entirely.
    """
    w = np.asarray(weights, dtype=float)
    X = np.atleast_2d(np.asarray(X_norm, dtype=float))
    mean = np.zeros(X.shape[0])
    var = np.zeros(X.shape[0])
    for model, w_i in zip(models, w):
        if w_i == 0.0:
            continue
        post = predict(model, X)
        mean += w_i * post.mean
        var += w_i * w_i * post.variance
    return mean, var
