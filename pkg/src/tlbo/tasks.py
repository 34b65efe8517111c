"""Task datasets: parameter vectors paired with a scalar quality measure.

A task is one measured process (e.g. one sheet-metal/laser-power setup);
inputs are machine parameters in physical units, outputs the quality to
minimize.  Files are either CSV with header ``x1,...,xn,y`` or JSON
``{"task_id": ..., "inputs": [[..]], "outputs": [..]}``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["TaskDataset", "load_task", "load_task_csv", "load_task_json", "save_task_csv"]


@dataclass(frozen=True)
class TaskDataset:
    """Immutable (inputs, outputs) pairs of one source or target task."""

    task_id: str
    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        outputs = np.asarray(self.outputs, dtype=float).ravel()
        if inputs.shape[0] != outputs.size:
            raise ValueError("inputs and outputs disagree on the number of rows")
        if inputs.shape[0] < 1:
            raise ValueError("a task needs at least one observation")
        if not np.all(np.isfinite(inputs)) or not np.all(np.isfinite(outputs)):
            raise ValueError("task data must be finite")
        inputs.setflags(write=False)
        outputs.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    @property
    def n_points(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_dims(self) -> int:
        return self.inputs.shape[1]

    def appended(self, x, y: float) -> "TaskDataset":
        """New dataset with one observation added."""
        x = np.asarray(x, dtype=float).ravel()
        return TaskDataset(
            self.task_id,
            np.vstack([self.inputs, x[None, :]]),
            np.append(self.outputs, float(y)),
        )

    def best(self) -> tuple[np.ndarray, float]:
        """Observation with minimal output; lowest index wins ties."""
        i = int(np.argmin(self.outputs))
        return self.inputs[i].copy(), float(self.outputs[i])

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "inputs": self.inputs.tolist(),
            "outputs": self.outputs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskDataset":
        return cls(str(d["task_id"]), d["inputs"], d["outputs"])


def load_task_csv(path) -> TaskDataset:
    """Read a task from CSV with header ``x1,...,xn,y``; id from file name."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        n = len(header) - 1
        expected = [f"x{i + 1}" for i in range(n)] + ["y"]
        if n < 1 or header != expected:
            raise ValueError(
                f"{path}: header must be x1,...,xn,y; got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != n + 1:
                raise ValueError(f"{path}:{lineno}: expected {n + 1} columns")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    return TaskDataset(path.stem, data[:, :n], data[:, n])


def load_task_json(path) -> TaskDataset:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("task_id", "inputs", "outputs"):
        if key not in doc:
            raise ValueError(f"{path}: missing key {key!r}")
    return TaskDataset.from_dict(doc)


def load_task(path) -> TaskDataset:
    """Dispatch on file extension (.csv or .json)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_task_csv(path)
    if path.suffix.lower() == ".json":
        return load_task_json(path)
    raise ValueError(f"{path}: unsupported task file type {path.suffix!r}")


def save_task_csv(task: TaskDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(task.n_dims)] + ["y"])
        for x, y in zip(task.inputs, task.outputs):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])
