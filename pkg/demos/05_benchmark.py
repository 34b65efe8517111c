"""Compare strategies on a synthetic family of related tasks.

A desk-scale version of the evaluation protocol: paired start points per
trial, best-so-far curves, iterations-to-threshold.  Writes the CSV/JSON
reports next to this script.

Run:  python3 demos/05_benchmark.py
"""

from pathlib import Path

import numpy as np

from tlbo import FitConfig, OptimizerConfig, TaskFamilySpec, emit_report, run_benchmark

spec = TaskFamilySpec(
    base="damped_cosine",
    n_sources=3,
    samples_range=(12, 20),
    output_offset_range=(2.0, 4.0),
    input_shift_frac=0.08,
    seed=5,
)

report = run_benchmark(
    spec,
    strategies=("random", "vanilla_bo", "ours"),
    iterations=6,
    trials=5,
    seed=9,
    kernel_family="se",
    fit=FitConfig(n_starts=2, max_iter=60),
    optimizer=OptimizerConfig(restarts=6, grid_density=32, max_iter=60),
    weight_samples=50,
)

print(f"target optimum {report.optimum_value:.4f}, threshold {report.threshold:.4f}\n")
print("strategy      per-iteration mean best")
for name in report.strategies:
    mean, std = report.curve_stats(name)
    curve = "  ".join(f"{v:6.3f}" for v in mean)
    reached = report.trials_reaching_threshold(name)
    print(f"{name:12s}  {curve}   reached {reached}/{report.trials}")

out = Path(__file__).parent / "bench_output"
csv_path, json_path = emit_report(report, out)
print(f"\nwrote {csv_path}")
print(f"wrote {json_path}")

curves = np.asarray(report.best_so_far["ours"])
assert np.all(np.diff(curves, axis=1) <= 1e-12), "best-so-far must be monotone"
