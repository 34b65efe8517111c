"""Ranking losses, posterior-sampled ensemble weights, forced target floor.

Run:  python3 demos/03_ensemble_weights.py
"""

import numpy as np

from tlbo import (
    Schedule,
    compute_weights,
    condition,
    ensemble_predict,
    force_target_weight,
    model_losses,
    ranking_loss,
    se,
)

rng = np.random.default_rng(1)

# the ranking loss counts ordered pairs whose orderings disagree
print("loss([0.2, 0.5] vs [1.0, 0.3]) =", ranking_loss([0.2, 0.5], [1.0, 0.3]))
print("loss is invariant under monotone transforms:",
      ranking_loss([1, 2, 3], [10, 20, 30]), "== 0 for any increasing pair")

# three source models in the shared normalized space: one matches the
# target's landscape, one is inverted, one is unrelated noise
X_train = np.linspace(-0.4, 0.6, 12)[:, None]
f = lambda z: (z - 0.1) ** 2  # noqa: E731
kern = se(1.0, 0.3)
good = condition(X_train, f(X_train[:, 0]), kern, 1e-6)
inverted = condition(X_train, -f(X_train[:, 0]), kern, 1e-6)
noise = condition(X_train, rng.standard_normal(12), kern, 1e-6)

# five target observations from the same landscape
X_t = rng.uniform(-0.3, 0.5, size=(5, 1))
y_t = f(X_t[:, 0])
target = condition(X_t, y_t, kern, 1e-4)

losses = model_losses([good, inverted, noise], target, X_t, y_t)
print("\nposterior-mean ranking losses (good, inverted, noise, target):", losses)

w = compute_weights([good, inverted, noise], target, X_t, y_t, sample_count=100, seed=0)
print("sampled weights:", np.round(w, 3), " sum =", w.sum())

# force a growing floor on the target weight
sched = Schedule(alpha0=0.1, alpha1=0.1, beta=0.95)
for i in (0, 3, 8, 20):
    forced = force_target_weight(w, i, sched)
    print(f"iteration {i:2d}: target floor {sched.floor_at(i):.2f} ->",
          np.round(forced, 3))

# the ensemble prediction mixes means and variances by weight
mean, var = ensemble_predict([good, inverted, noise, target], forced, [[0.1]])
print("\nensemble at z=0.1: mean", f"{mean[0]:+.3f}", "var", f"{var[0]:.4f}")
