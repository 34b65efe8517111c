"""How source and target tasks are mapped into one comparable regime.

Run:  python3 demos/02_task_normalization.py
"""

import numpy as np

from tlbo import Box, TaskDataset, source_normalize, target_normalize

# a small source task: 1-D machine parameter, measured quality (lower = better)
source = TaskDataset("demo_source", [[2.0], [4.0], [6.0]], [5.0, 1.0, 3.0])
norm, t = source_normalize(source)

print("source inputs:  ", source.inputs.ravel())
print("source outputs: ", source.outputs)
print("optimum row x^ =", t.input_shift, " range dx =", t.input_scale)
print("normalized x:   ", norm.inputs.ravel(), " (optimum at exactly 0)")
print("standardized y: ", np.round(norm.outputs, 5), f" (mu={t.output_mean}, sigma={t.output_std:.5f})")

# round trip back to physical units
z = np.array([0.25])
print("\nnormalized 0.25 is physical", t.invert_input(z), "=", t.invert_input(t.apply_input(t.invert_input(z))))

# the target task grows online, so it is centered on its first observation
box = Box([0.0], [10.0])
target = TaskDataset("demo_target", [[4.0], [6.0]], [10.0, 7.0])
norm_t, tt = target_normalize(target, x0=[4.0], box=box)
print("\ntarget centered on x0=4, scaled by the box range:")
print("normalized target x:", norm_t.inputs.ravel())
print("standardized target y:", np.round(norm_t.outputs, 5))

# ranking is what the ensemble weighting consumes; standardization keeps it
assert list(np.argsort(norm_t.outputs)) == list(np.argsort(target.outputs))
print("output ranking preserved:", list(np.argsort(target.outputs)))
