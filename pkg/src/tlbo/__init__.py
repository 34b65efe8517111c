"""Transfer-learning Bayesian optimization for online machine parameter tuning.

The package combines Gaussian-process models of previously measured
processes into a ranking-loss weighted ensemble, forces a growing floor on
the weight of the process being tuned, and minimizes the ensemble surrogate
inside the feasible parameter box.  The loop is exposed as an ask/tell
session, over HTTP for the operator console, and as a CLI.
"""

from .bench import BenchReport, TaskFamilySpec, emit_report, generate_family, run_benchmark
from .box import Box
from .ensemble import (
    Schedule,
    compute_weights,
    ensemble_predict,
    force_target_weight,
    model_losses,
    ranking_loss,
)
from .gp import (
    FitConfig,
    FitResult,
    GpConditioningError,
    GpModel,
    Posterior,
    condition,
    fit_hyperparameters,
    log_marginal_likelihood,
    loo_predictions,
    predict,
)
from .kernels import KernelSpec, kernel_eval, kernel_matrix, kernel_sum, matern25, se
from .minimize import OptimizerConfig, minimize_surrogate
from .session import (
    InvalidObservationError,
    OutOfBoxError,
    PhaseError,
    Session,
    SessionConfig,
    StopRule,
)
from .tasks import TaskDataset, load_task, load_task_csv, load_task_json, save_task_csv
from .transforms import NormTransform, minmax_normalize, source_normalize, target_normalize

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "Box",
    "FitConfig",
    "FitResult",
    "GpConditioningError",
    "GpModel",
    "InvalidObservationError",
    "KernelSpec",
    "NormTransform",
    "OptimizerConfig",
    "OutOfBoxError",
    "PhaseError",
    "Posterior",
    "Schedule",
    "Session",
    "SessionConfig",
    "StopRule",
    "TaskDataset",
    "TaskFamilySpec",
    "compute_weights",
    "condition",
    "emit_report",
    "ensemble_predict",
    "fit_hyperparameters",
    "force_target_weight",
    "generate_family",
    "kernel_eval",
    "kernel_matrix",
    "kernel_sum",
    "load_task",
    "load_task_csv",
    "load_task_json",
    "log_marginal_likelihood",
    "loo_predictions",
    "matern25",
    "minimize_surrogate",
    "minmax_normalize",
    "model_losses",
    "predict",
    "ranking_loss",
    "run_benchmark",
    "save_task_csv",
    "se",
    "source_normalize",
    "target_normalize",
]
