"""Box constraints on the physical parameter space (the process window)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Box"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounds [x_min, x_max], physical units."""

    x_min: np.ndarray
    x_max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.x_min, dtype=float).ravel()
        hi = np.asarray(self.x_max, dtype=float).ravel()
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "x_min", lo)
        object.__setattr__(self, "x_max", hi)
        self.validate()

    def validate(self):
        if self.x_min.shape != self.x_max.shape:
            raise ValueError("box bounds must have the same dimension")
        if not np.all(self.x_min < self.x_max):
            raise ValueError("box requires x_min < x_max elementwise")

    @property
    def n_dims(self) -> int:
        return self.x_min.size

    @property
    def range(self) -> np.ndarray:
        return self.x_max - self.x_min

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        return bool(np.all(x >= self.x_min) and np.all(x <= self.x_max))

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.x_min, self.x_max)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min.tolist(), "x_max": self.x_max.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(np.asarray(d["x_min"], dtype=float), np.asarray(d["x_max"], dtype=float))
