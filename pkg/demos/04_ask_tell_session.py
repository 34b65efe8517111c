"""A full ask/tell tuning session against a synthetic process.

The "machine" here is a quadratic quality landscape; in production the
tell step is a physical cut plus a measurement.

Run:  python3 demos/04_ask_tell_session.py
"""

import numpy as np

from tlbo import Box, Session, SessionConfig, StopRule, TaskDataset

rng = np.random.default_rng(7)


def process(x):
    """True (unknown) target process: optimum at 4.2."""
    return float((np.asarray(x)[0] - 4.2) ** 2 + 1.0)


# two related source processes measured earlier, optima at 3.0 and 4.5
sources = []
for task_id, opt in (("thin_sheet", 3.0), ("thick_sheet", 4.5)):
    X = np.sort(rng.uniform(0, 10, size=20))[:, None]
    sources.append(TaskDataset(task_id, X, (X[:, 0] - opt) ** 2 + 0.2 * rng.standard_normal(20)))

config = SessionConfig(
    box=Box([0.0], [10.0]),
    kernel_family="se+matern25",
    seed=11,
    stop=StopRule(max_iterations=6, quality_threshold=1.02),
)
session = Session.create(sources, config)

# initialization: a source optimum, then a point in its vicinity
for step in range(2):
    x = session.suggest_start()
    y = process(x)
    session.tell(x, y)
    print(f"init {step + 1}: x = {x[0]:.4f}  ->  y = {y:.4f}")

# the optimization loop; ask is idempotent until the next tell
while session.phase == "running":
    x, diag = session.ask()
    y = process(x)
    session.tell(x, y)
    w = np.round(diag["weights"], 2)
    print(f"iter {diag['iteration']}: x = {x[0]:.4f}  ->  y = {y:.4f}   weights {w}")

best_x, best_y = session.best_so_far()
print(f"\nstopped in phase {session.phase!r}")
print(f"best cut: x = {best_x[0]:.4f}, y = {best_y:.4f} (true optimum 4.2 -> 1.0)")

# the whole session round-trips through JSON, including the next suggestion
snapshot = session.to_dict()
print("snapshot keys:", sorted(snapshot))
