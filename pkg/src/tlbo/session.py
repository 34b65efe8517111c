"""Ask/tell state machine for one online parameter-tuning run.

The physical measurement (cut, measure, report) happens outside the
software, so the optimization loop body is split into an idempotent
``ask`` (renormalize the growing target data, refit the target GP, weigh
the ensemble, minimize the surrogate) and a mutating ``tell``.  All
randomness is derived from the master seed and the observation count, so
repeated asks, reruns and snapshot-restored sessions reproduce the exact
same suggestions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .box import Box
from .ensemble import (
    EnsembleState,
    Schedule,
    compute_weights,
    force_target_weight,
    model_losses,
    ranking_loss,
)
from .gp import FitConfig, GpModel, condition, fit_hyperparameters, predict
from .kernels import KernelSpec, kernel_sum
from .minimize import OptimizerConfig, minimize_surrogate
from .tasks import TaskDataset
from .transforms import NormTransform, minmax_normalize, source_normalize, target_normalize

__all__ = [
    "StopRule",
    "SessionConfig",
    "Session",
    "PhaseError",
    "OutOfBoxError",
    "InvalidObservationError",
    "derive_seed",
]

PHASE_AWAIT_INIT_1 = "await_init_1"
PHASE_AWAIT_INIT_2 = "await_init_2"
PHASE_RUNNING = "running"
PHASE_STOPPED = "stopped"

_VICINITY_FRACTION = 0.05
_FAILURE_STD_FACTOR = 3.0


class PhaseError(RuntimeError):
    """Operation called in the wrong session phase."""


class OutOfBoxError(ValueError):
    """Observation point violates the box constraint."""


class InvalidObservationError(ValueError):
    """Measured quality is missing or non-finite without a failure flag."""


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from integer components."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@dataclass(frozen=True)
class StopRule:
    max_iterations: int = 20
    quality_threshold: float | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def to_dict(self) -> dict:
        return {
            "max_iterations": self.max_iterations,
            "quality_threshold": self.quality_threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StopRule":
        qt = d.get("quality_threshold")
        return cls(int(d["max_iterations"]), None if qt is None else float(qt))


def _fit_config_to_dict(c: FitConfig) -> dict:
    return {
        "n_starts": c.n_starts,
        "max_iter": c.max_iter,
        "grad_tol": c.grad_tol,
        "length_scale_init": list(c.length_scale_init),
        "signal_variance_init": list(c.signal_variance_init),
        "noise_variance_init": list(c.noise_variance_init),
        "length_scale_bounds": list(c.length_scale_bounds),
        "signal_variance_bounds": list(c.signal_variance_bounds),
        "noise_variance_bounds": list(c.noise_variance_bounds),
        "seed": c.seed,
    }


def _fit_config_from_dict(d: dict) -> FitConfig:
    kwargs = dict(d)
    for key, value in kwargs.items():
        if isinstance(value, list):
            kwargs[key] = tuple(value)
    return FitConfig(**kwargs)


def _kernel_to_dict(spec: KernelSpec) -> dict:
    if spec.family == "sum":
        return {"family": "sum", "summands": [_kernel_to_dict(s) for s in spec.summands]}
    return {
        "family": spec.family,
        "signal_variance": spec.signal_variance,
        "length_scales": list(spec.length_scales),
    }


def _kernel_from_dict(d: dict) -> KernelSpec:
    if d["family"] == "sum":
        return kernel_sum(*(_kernel_from_dict(s) for s in d["summands"]))
    return KernelSpec(
        d["family"], float(d["signal_variance"]), tuple(float(v) for v in d["length_scales"])
    )


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs besides the source datasets."""

    box: Box
    kernel_family: str = "se+matern25"
    fit: FitConfig = field(default_factory=FitConfig)
    schedule: Schedule | None = field(default_factory=Schedule)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    weight_samples: int = 100
    seed: int = 0
    stop: StopRule = field(default_factory=StopRule)
    start_source: int | None = None
    source_normalization: str = "optimum"
    refit_target_from: int = 4

    def __post_init__(self):
        if self.weight_samples < 1:
            raise ValueError("weight_samples must be >= 1")
        if self.source_normalization not in ("optimum", "minmax"):
            raise ValueError("source_normalization must be 'optimum' or 'minmax'")

    def to_dict(self) -> dict:
        return {
            "box": self.box.to_dict(),
            "kernel_family": self.kernel_family,
            "fit": _fit_config_to_dict(self.fit),
            "schedule": None if self.schedule is None else self.schedule.to_dict(),
            "optimizer": self.optimizer.to_dict(),
            "weight_samples": self.weight_samples,
            "seed": self.seed,
            "stop": self.stop.to_dict(),
            "start_source": self.start_source,
            "source_normalization": self.source_normalization,
            "refit_target_from": self.refit_target_from,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        # an omitted schedule means the default forced-weight schedule; an
        # explicit null disables forcing (the vanilla-ensemble baseline)
        sched = d.get("schedule") if "schedule" in d else Schedule().to_dict()
        return cls(
            box=Box.from_dict(d["box"]),
            kernel_family=d.get("kernel_family", "se+matern25"),
            fit=_fit_config_from_dict(d.get("fit", _fit_config_to_dict(FitConfig()))),
            schedule=None if sched is None else Schedule.from_dict(sched),
            optimizer=OptimizerConfig.from_dict(d.get("optimizer", {})),
            weight_samples=int(d.get("weight_samples", 100)),
            seed=int(d.get("seed", 0)),
            stop=StopRule.from_dict(d.get("stop", {"max_iterations": 20})),
            start_source=d.get("start_source"),
            source_normalization=d.get("source_normalization", "optimum"),
            refit_target_from=int(d.get("refit_target_from", 4)),
        )


class Session:
    """Single-writer optimization session over one target process."""

    def __init__(
        self,
        config: SessionConfig,
        source_tasks: list[TaskDataset],
        source_transforms: list[NormTransform],
        source_models: list[GpModel],
        target_task: TaskDataset | None = None,
        history: list[dict] | None = None,
        stopped: bool = False,
    ):
        self.config = config
        self.source_tasks = source_tasks
        self.source_transforms = source_transforms
        self.source_models = source_models
        self.target_task = target_task
        self.history = history or []
        self._stopped = stopped
        self._last_ask: dict | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def create(cls, sources: list[TaskDataset], config: SessionConfig) -> "Session":
        """Normalize every source task and condition a fitted GP on it."""
        if not sources:
            raise ValueError("at least one source dataset is required")
        n = config.box.n_dims
        for task in sources:
            if task.n_dims != n:
                raise ValueError(
                    f"source {task.task_id!r} has dimension {task.n_dims}, box has {n}"
                )
            if task.n_points < 2:
                raise ValueError(f"source {task.task_id!r} needs at least 2 observations")
        transforms, models = [], []
        for m, task in enumerate(sources):
            if config.source_normalization == "optimum":
                norm, transform = source_normalize(task)
            else:
                norm, transform = minmax_normalize(task)
            fit = fit_hyperparameters(
                norm.inputs,
                norm.outputs,
                config.kernel_family,
                replace(config.fit, seed=derive_seed(config.seed, 101, m)),
            )
            models.append(condition(norm.inputs, norm.outputs, fit.kernel, fit.noise_variance))
            transforms.append(transform)
        return cls(config, list(sources), transforms, models)

    # -- state -------------------------------------------------------------

    @property
    def n_observations(self) -> int:
        return 0 if self.target_task is None else self.target_task.n_points

    @property
    def iteration(self) -> int:
        return max(0, self.n_observations - 2)

    @property
    def phase(self) -> str:
        if self._stopped:
            return PHASE_STOPPED
        if self.n_observations == 0:
            return PHASE_AWAIT_INIT_1
        if self.n_observations == 1:
            return PHASE_AWAIT_INIT_2
        return PHASE_RUNNING

    def best_so_far(self):
        """(x, y) with minimal observed y, or None; earliest index on ties."""
        if self.target_task is None:
            return None
        return self.target_task.best()

    # -- the loop ----------------------------------------------------------

    def suggest_start(self) -> np.ndarray:
        """Initial two-point strategy: a source optimum, then its vicinity."""
        phase = self.phase
        box = self.config.box
        if phase == PHASE_AWAIT_INIT_1:
            idx = self.config.start_source
            if idx is None:
                idx = len(self.source_tasks) - 1
            x_hat, _ = self.source_tasks[idx].best()
            return box.clip(x_hat)
        if phase == PHASE_AWAIT_INIT_2:
            first = self.target_task.inputs[0]
            return box.clip(first + _VICINITY_FRACTION * box.range)
        raise PhaseError(f"suggest_start is only valid during initialization, not {phase}")

    def tell(self, x, y: float | None = None, failure: bool = False) -> None:
        """Record one measured observation and advance the state machine."""
        if self.phase == PHASE_STOPPED:
            raise PhaseError("session is stopped")
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.config.box.n_dims:
            raise OutOfBoxError("observation dimension does not match the box")
        if not self.config.box.contains(x):
            raise OutOfBoxError("x lies outside the box")
        if failure:
            y = self._failure_penalty()
        else:
            if y is None or not np.isfinite(y):
                raise InvalidObservationError(
                    "y must be finite unless the failure flag is set"
                )
            y = float(y)
        if self.target_task is None:
            self.target_task = TaskDataset("target", x[None, :], [y])
        else:
            self.target_task = self.target_task.appended(x, y)
        record = {"x": x.tolist(), "y": y, "failure": bool(failure)}
        if self._last_ask is not None:
            record.update(
                weights=self._last_ask["weights"],
                losses=self._last_ask["losses"],
                surrogate_value=self._last_ask["surrogate_value"],
            )
        else:
            record.update(weights=None, losses=None, surrogate_value=None)
        self.history.append(record)
        self._last_ask = None
        self._check_stop()

    def _failure_penalty(self) -> float:
        """Worst observed y plus 3 population standard deviations."""
        if self.target_task is None:
            raise InvalidObservationError(
                "cannot encode a failure before any successful observation exists"
            )
        ys = self.target_task.outputs
        return float(ys.max() + _FAILURE_STD_FACTOR * np.std(ys))

    def _check_stop(self):
        if self.n_observations < 2:
            return
        threshold = self.config.stop.quality_threshold
        if threshold is not None and self.best_so_far()[1] <= threshold:
            self._stopped = True
        elif self.iteration >= self.config.stop.max_iterations:
            self._stopped = True

    def ask(self):
        """One loop body: returns (x_next, diagnostics) without mutating state.

        Idempotent: repeated calls between tells return identical values,
        also across snapshot save/load, because every random draw is seeded
        from (master seed, observation count).
        """
        if self.phase != PHASE_RUNNING:
            raise PhaseError(f"ask requires a running session, not {self.phase}")
        if self._last_ask is not None:
            return np.array(self._last_ask["x"]), dict(self._last_ask)
        n_t = self.n_observations
        cfg = self.config
        norm_target, t_transform = target_normalize(
            self.target_task, self.target_task.inputs[0], cfg.box
        )
        target_model = self._condition_target(norm_target)
        losses = model_losses(
            self.source_models, target_model, norm_target.inputs, norm_target.outputs
        )
        weights = compute_weights(
            self.source_models,
            target_model,
            norm_target.inputs,
            norm_target.outputs,
            cfg.weight_samples,
            seed=derive_seed(cfg.seed, 201, n_t),
        )
        if cfg.schedule is not None:
            weights = force_target_weight(weights, self.iteration, cfg.schedule)
        ensemble = EnsembleState(
            models=tuple(self.source_models) + (target_model,),
            weights=weights,
            raw_losses=losses,
            n_observations=n_t,
            iteration=self.iteration,
            schedule=cfg.schedule,
        )
        x_next, value = minimize_surrogate(
            ensemble.predict,
            cfg.box,
            t_transform,
            cfg.optimizer,
            seed=derive_seed(cfg.seed, 301, n_t),
            exclude=self.target_task.inputs,
        )
        self._last_ask = {
            "x": x_next.tolist(),
            "weights": weights.tolist(),
            "losses": losses.tolist(),
            "surrogate_value": value,
            "iteration": self.iteration,
        }
        return x_next, dict(self._last_ask)

    def _condition_target(self, norm_target: TaskDataset) -> GpModel:
        """Target GP; hyperparameters are refit only once enough data exists."""
        n_t = norm_target.n_points
        if n_t >= self.config.refit_target_from:
            fit = fit_hyperparameters(
                norm_target.inputs,
                norm_target.outputs,
                self.config.kernel_family,
                replace(self.config.fit, seed=derive_seed(self.config.seed, 401, n_t)),
            )
            kernel, noise = fit.kernel, fit.noise_variance
        else:
            donor = self._donor_source(norm_target)
            kernel, noise = donor.kernel, donor.noise_variance
        return condition(norm_target.inputs, norm_target.outputs, kernel, noise)

    def _donor_source(self, norm_target: TaskDataset) -> GpModel:
        """Source whose kernel the young target GP borrows.

        The highest-weight source of the previous iteration when weights
        exist, otherwise the source with the lowest posterior-mean ranking
        loss on the current target data.
        """
        for record in reversed(self.history):
            if record.get("weights"):
                w = np.asarray(record["weights"][:-1])
                return self.source_models[int(np.argmax(w))]
        losses = [
            ranking_loss(predict(m, norm_target.inputs).mean, norm_target.outputs)
            for m in self.source_models
        ]
        return self.source_models[int(np.argmin(losses))]

    # -- persistence ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "sources": [t.to_dict() for t in self.source_tasks],
            "source_transforms": [t.to_dict() for t in self.source_transforms],
            "source_kernels": [_kernel_to_dict(m.kernel) for m in self.source_models],
            "source_noise": [m.noise_variance for m in self.source_models],
            "target": None if self.target_task is None else self.target_task.to_dict(),
            "history": self.history,
            "stopped": self._stopped,
            "rng_state": {"master_seed": self.config.seed, "n_observations": self.n_observations},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Session":
        config = SessionConfig.from_dict(d["config"])
        sources = [TaskDataset.from_dict(t) for t in d["sources"]]
        transforms = [NormTransform.from_dict(t) for t in d["source_transforms"]]
        models = []
        for task, transform, kernel_doc, noise in zip(
            sources, transforms, d["source_kernels"], d["source_noise"]
        ):
            models.append(
                condition(
                    transform.apply_input(task.inputs),
                    transform.apply_output(task.outputs),
                    _kernel_from_dict(kernel_doc),
                    float(noise),
                )
            )
        target = None if d.get("target") is None else TaskDataset.from_dict(d["target"])
        return cls(
            config,
            sources,
            transforms,
            models,
            target_task=target,
            history=list(d.get("history", [])),
            stopped=bool(d.get("stopped", False)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Session":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
