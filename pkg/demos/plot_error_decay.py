"""
Gradient-estimate error decay of the double-momentum optimizer
==============================================================

A walkthrough of the library's central property: with linearly growing
query weights and matching momentum, the squared error of the gradient
estimate shrinks like 1/t along the run — even though every round uses a
single fresh sample.
"""

# Build a noisy quadratic bowl: exact gradients are known in closed form,
# so the estimate error is measurable at every step.
import numpy as np

from mu2opt import geometry, harness, problems
from mu2opt.optimizers import OptimizerConfig, run

problem = problems.make_additive_quadratic(3, np.zeros(3), sigma=1.0)
ball = geometry.ball(np.zeros(3), 1.0)

# Run the double-momentum method from the boundary with the
# theory-prescribed step size, averaging the recorded eps_sq
# (squared estimate error) over independent seeds.
T = 1000
config = OptimizerConfig(
    algorithm="mu2_sgd",
    eta=1.0 / (8 * T),
    T=T,
    feasible_set=ball,
    x1=np.array([1.0, 0.0, 0.0]),
)

by_t: dict[int, list[float]] = {}
for seed in range(20):
    trajectory = run(problem, config, np.random.default_rng(seed))
    for t, e in zip(trajectory.steps, trajectory.eps_sq):
        by_t.setdefault(t, []).append(e)

ts = sorted(t for t in by_t if t >= 5)
mean_eps = [float(np.mean(by_t[t])) for t in ts]

# Fit the decay exponent on log-log axes; ~-1 means 1/t decay.
slope = harness.slope_fit(ts, mean_eps)
print(f"fitted decay exponent: {slope:.3f}  (1/t decay would be -1)")

# Plot the measured curve against a 1/t reference line.
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

plt.figure(figsize=(6, 4))
plt.loglog(ts, mean_eps, label="mean squared estimate error")
plt.loglog(ts, [mean_eps[0] * ts[0] / t for t in ts], "--", label="1/t reference")
plt.xlabel("round t")
plt.ylabel("mean eps_sq")
plt.legend()
plt.tight_layout()
plt.savefig("error_decay.png", dpi=120)
print("wrote error_decay.png")
