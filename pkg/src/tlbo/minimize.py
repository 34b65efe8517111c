"""Box-constrained minimization of a cheap surrogate objective.

A coarse grid scan plus Latin-hypercube start points feed a batched
projected-gradient refinement (central differences, backtracking steps,
every move clipped to the box).  The surrogate is evaluated in normalized
coordinates while the search and the returned minimizer live in physical
units; an optional soft-constraint penalty and an exploration term turn
the plain mean minimization into a lower-confidence-bound search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .box import Box
from .transforms import NormTransform

__all__ = ["Box", "OptimizerConfig", "minimize_surrogate"]

_LHS_BLOCK = 16
_GRID_POINT_CAP = 4096
_DUPLICATE_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the multi-start surrogate minimization.

    ``penalty`` is an optional callable on one physical parameter vector,
    weighted by ``penalty_weight``; ``exploration`` is the LCB coefficient
    (0 = pure surrogate-mean minimization).
    """

    penalty_weight: float = 0.0
    penalty: Callable[[np.ndarray], float] | None = None
    restarts: int = 32
    grid_density: int = 64
    exploration: float = 0.0
    max_iter: int = 200

    def __post_init__(self):
        if self.penalty_weight < 0:
            raise ValueError("penalty_weight must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.grid_density < 2:
            raise ValueError("grid_density must be >= 2 per dimension")
        if self.exploration < 0:
            raise ValueError("exploration must be >= 0")

    def to_dict(self) -> dict:
        return {
            "penalty_weight": self.penalty_weight,
            "restarts": self.restarts,
            "grid_density": self.grid_density,
            "exploration": self.exploration,
            "max_iter": self.max_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        return cls(
            penalty_weight=float(d.get("penalty_weight", 0.0)),
            restarts=int(d.get("restarts", 32)),
            grid_density=int(d.get("grid_density", 64)),
            exploration=float(d.get("exploration", 0.0)),
            max_iter=int(d.get("max_iter", 200)),
        )


def _grid_points(box: Box, density: int) -> np.ndarray:
    n = box.n_dims
    per_dim = min(density, max(2, int(round(_GRID_POINT_CAP ** (1.0 / n)))))
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in zip(box.x_min, box.x_max)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _lhs_starts(box: Box, count: int, seed: int) -> np.ndarray:
    """Prefix-stable start sequence: fixed-size LHS blocks, one seed each.

    Asking for more starts appends blocks without changing earlier points,
    so the achieved minimum is monotone in the restart count.
    """
    blocks = []
    for b in range((count + _LHS_BLOCK - 1) // _LHS_BLOCK):
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        sampler = qmc.LatinHypercube(d=box.n_dims, seed=rng)
        blocks.append(sampler.random(_LHS_BLOCK))
    unit = np.concatenate(blocks, axis=0)[:count]
    return box.x_min + unit * box.range


def _refine(acq, x0: np.ndarray, box: Box, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched projected-gradient descent from every row of ``x0``."""
    x = x0.copy()
    f = acq(x)
    n_starts, n = x.shape
    fd = 1e-6 * box.range
    step = np.full(n_starts, 0.1)
    active = np.isfinite(f)
    multipliers = np.array([1.0, 0.25, 0.05])
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        probes = np.concatenate(
            [xa[:, None, :] + fd * np.eye(n), xa[:, None, :] - fd * np.eye(n)], axis=0
        ).reshape(-1, n)
        vals = acq(probes).reshape(2, idx.size, n)
        grad = (vals[0] - vals[1]) / (2.0 * fd)
        # steepest descent in box-relative coordinates
        d = -grad * box.range**2
        d_rel = np.max(np.abs(d) / box.range, axis=1)
        stuck = (d_rel == 0) | ~np.isfinite(d_rel)
        scale = np.where(stuck, 0.0, step[idx] / np.where(d_rel == 0, 1.0, d_rel))
        cands = np.clip(
            xa[None, :, :] + multipliers[:, None, None] * scale[None, :, None] * d[None, :, :],
            box.x_min,
            box.x_max,
        )
        f_cands = acq(cands.reshape(-1, n)).reshape(len(multipliers), idx.size)
        best_k = np.nanargmin(np.where(np.isfinite(f_cands), f_cands, np.inf), axis=0)
        f_best = f_cands[best_k, np.arange(idx.size)]
        improved = np.isfinite(f_best) & (f_best < f[idx] - 1e-15)
        move = idx[improved]
        x[move] = cands[best_k[improved], improved]
        f[move] = f_best[improved]
        step[move] = np.where(best_k[improved] == 0, step[move] * 1.3, step[move] * 0.5)
        shrink = idx[~improved]
        step[shrink] *= 0.2
        step = np.minimum(step, 0.5)
        active[idx[stuck]] = False
        active[step < 1e-7] = False
    return x, f


def minimize_surrogate(
    objective,
    box: Box,
    transform: NormTransform,
    config: OptimizerConfig | None = None,
    seed: int = 0,
    exclude=None,
) -> tuple[np.ndarray, float]:
    """Minimize ``mean - kappa*std + lambda*g`` of a surrogate over the box.

    Parameters
    ----------
    objective : callable
        Maps normalized inputs, shape (M, n), to ``(mean, variance)`` arrays.
    box : Box
        Physical search bounds; the result always satisfies them.
    transform : NormTransform
        Physical-to-normalized input map used before calling ``objective``.
    config : OptimizerConfig
    seed : int
        Seeds the Latin-hypercube starts; the result is deterministic.
    exclude : array_like, optional
        Physical points already evaluated; if the minimizer lands within
        1e-6 normalized distance of one, the best distinct candidate is
        returned instead.

    Returns
    -------
    (x_star, value) : physical-unit minimizer and its surrogate value.

    Raises
    ------
    ValueError
        If every candidate evaluates to a non-finite surrogate value.
    """
    config = config or OptimizerConfig()

    def acq(X_phys: np.ndarray) -> np.ndarray:
        mean, var = objective(transform.apply_input(X_phys))
        value = np.asarray(mean, dtype=float).copy()
        if config.exploration > 0:
            value -= config.exploration * np.sqrt(np.maximum(var, 0.0))
        if config.penalty_weight > 0 and config.penalty is not None:
            value += config.penalty_weight * np.array(
                [float(config.penalty(row)) for row in X_phys]
            )
        return value

    grid = _grid_points(box, config.grid_density)
    grid_vals = acq(grid)
    starts = _lhs_starts(box, config.restarts, seed)
    finite_grid = np.isfinite(grid_vals)
    seeds = starts
    if np.any(finite_grid):
        best_grid = grid[np.nanargmin(np.where(finite_grid, grid_vals, np.nan))]
        seeds = np.vstack([best_grid[None, :], starts])
    refined, refined_vals = _refine(acq, seeds, box, config.max_iter)

    cand_x = np.vstack([refined, seeds, grid])
    cand_f = np.concatenate([refined_vals, acq(seeds), grid_vals])
    ok = np.isfinite(cand_f)
    if not np.any(ok):
        raise ValueError("all candidates evaluated to non-finite surrogate values")
    cand_x, cand_f = cand_x[ok], cand_f[ok]
    order = np.argsort(cand_f, kind="stable")

    if exclude is not None and len(exclude) > 0:
        seen = transform.apply_input(np.atleast_2d(np.asarray(exclude, dtype=float)))
        for i in order:
            z = transform.apply_input(cand_x[i])
            if np.all(np.linalg.norm(seen - z, axis=1) > _DUPLICATE_TOL):
                return box.clip(cand_x[i]), float(cand_f[i])
    best = order[0]
    return box.clip(cand_x[best]), float(cand_f[best])
