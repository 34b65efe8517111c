"""Affine normalization maps that bring tasks into one comparable regime.

Source tasks are centered on their own empirical optimum and scaled by the
per-dimension input range; the target task, whose optimum is unknown while
the dataset is still growing, is centered on its first observation and
scaled by the search box.  Outputs are standardized per task (population
statistics).  All maps are invertible so suggestions can be reported in
physical units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tasks import TaskDataset

__all__ = [
    "NormTransform",
    "source_normalize",
    "target_normalize",
    "minmax_normalize",
    "standardize_stats",
]

_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class NormTransform:
    """Invertible affine map: x~ = (x - shift) / scale, y~ = (y - mean) / std.

    ``floored_dims`` lists input dimensions whose zero range was replaced by
    1.0; ``std_floored`` flags a degenerate output spread.
    """

    input_shift: np.ndarray
    input_scale: np.ndarray
    output_mean: float
    output_std: float
    floored_dims: tuple[int, ...] = ()
    std_floored: bool = False

    def __post_init__(self):
        shift = np.asarray(self.input_shift, dtype=float).ravel()
        scale = np.asarray(self.input_scale, dtype=float).ravel()
        if shift.shape != scale.shape:
            raise ValueError("shift and scale must have the same dimension")
        if np.any(scale <= 0):
            raise ValueError("input scales must be positive")
        if self.output_std <= 0:
            raise ValueError("output std must be positive")
        shift.setflags(write=False)
        scale.setflags(write=False)
        object.__setattr__(self, "input_shift", shift)
        object.__setattr__(self, "input_scale", scale)

    @property
    def n_dims(self) -> int:
        return self.input_shift.size

    def apply_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.input_shift) / self.input_scale

    def invert_input(self, x_norm) -> np.ndarray:
        x_norm = np.asarray(x_norm, dtype=float)
        return x_norm * self.input_scale + self.input_shift

    def apply_output(self, y):
        return (np.asarray(y, dtype=float) - self.output_mean) / self.output_std

    def invert_output(self, y_norm):
        return np.asarray(y_norm, dtype=float) * self.output_std + self.output_mean

    def to_dict(self) -> dict:
        return {
            "input_shift": self.input_shift.tolist(),
            "input_scale": self.input_scale.tolist(),
            "output_mean": self.output_mean,
            "output_std": self.output_std,
            "floored_dims": list(self.floored_dims),
            "std_floored": self.std_floored,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormTransform":
        return cls(
            np.asarray(d["input_shift"], dtype=float),
            np.asarray(d["input_scale"], dtype=float),
            float(d["output_mean"]),
            float(d["output_std"]),
            tuple(d.get("floored_dims", ())),
            bool(d.get("std_floored", False)),
        )


def standardize_stats(y) -> tuple[float, float, bool]:
    """Population mean/std of ``y`` with the degenerate-spread floor applied."""
    y = np.asarray(y, dtype=float)
    mean = float(np.mean(y))
    std = float(np.std(y))
    floor = _STD_FLOOR * max(1.0, abs(mean))
    if std < floor:
        return mean, floor, True
    return mean, std, False


def _floored_range(inputs) -> tuple[np.ndarray, tuple[int, ...]]:
    rng = np.abs(inputs.max(axis=0) - inputs.min(axis=0))
    floored = tuple(int(j) for j in np.flatnonzero(rng == 0.0))
    rng = np.where(rng == 0.0, 1.0, rng)
    return rng, floored


def _transformed(task: TaskDataset, t: NormTransform) -> TaskDataset:
    return TaskDataset(task.task_id, t.apply_input(task.inputs), t.apply_output(task.outputs))


def source_normalize(task: TaskDataset) -> tuple[TaskDataset, NormTransform]:
    """Normalize a source task around its empirical optimum.

    The input row with minimal output (lowest index on ties) becomes the
    origin; inputs are scaled by the per-dimension observed range, outputs
    standardized.  Needs at least 2 observations.
    """
    if task.n_points < 2:
        raise ValueError("source normalization needs at least 2 observations")
    x_hat = task.inputs[int(np.argmin(task.outputs))]
    scale, floored = _floored_range(task.inputs)
    mean, std, std_floored = standardize_stats(task.outputs)
    t = NormTransform(x_hat, scale, mean, std, floored, std_floored)
    return _transformed(task, t), t


def target_normalize(task: TaskDataset, x0, box) -> tuple[TaskDataset, NormTransform]:
    """Center the growing target task on its first observation.

    Inputs are shifted by ``x0`` and scaled by the box range; outputs are
    standardized with the task's current statistics (recomputed every call
    as the dataset grows).
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    box.validate()
    if x0.size != box.n_dims or task.n_dims != box.n_dims:
        raise ValueError("dimension mismatch between task, x0 and box")
    if np.any(x0 < box.x_min) or np.any(x0 > box.x_max):
        raise ValueError("x0 must lie within the box")
    mean, std, std_floored = standardize_stats(task.outputs)
    t = NormTransform(x0, box.x_max - box.x_min, mean, std, (), std_floored)
    return _transformed(task, t), t


def minmax_normalize(task: TaskDataset) -> tuple[TaskDataset, NormTransform]:
    """Plain per-task min-max input normalization (baseline scheme).

    Shifts by the per-dimension minimum instead of the empirical optimum;
    outputs standardized as usual.
    """
    scale, floored = _floored_range(task.inputs)
    mean, std, std_floored = standardize_stats(task.outputs)
    t = NormTransform(task.inputs.min(axis=0), scale, mean, std, floored, std_floored)
    return _transformed(task, t), t
