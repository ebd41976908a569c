"""Regret scales with how much the optimum moves, not with time.

The controller's accumulated excess cost over the best equilibrium in
hindsight grows with the total variation of that equilibrium (the path
length). With finitely many cost switches the running average of the
regret decays toward zero; more switches buy proportionally more regret.
"""

import numpy as np

from ddcontrol import (ControllerSpec, CostSpec, ExperimentConfig, NoiseSpec,
                       OfflineSpec, PlantSpec, path_length, regret,
                       run_experiment)
from ddcontrol.costs import CostFunction


class SwitchingCost(CostFunction):
    """Quadratic with a target that jumps at fixed times."""

    def __init__(self, H, targets, times):
        self.H = np.asarray(H, dtype=float)
        self.targets = [np.asarray(x, dtype=float) for x in targets]
        self.times = list(times)
        w = np.linalg.eigvalsh(self.H)
        self.alpha_z, self.l_z = float(w[0]), float(w[-1])

    def _target(self, t):
        idx = sum(t >= s for s in self.times) - 1
        return self.targets[idx]

    def eval(self, t, z):
        d = z - self._target(t)
        return 0.5 * float(d @ self.H @ d)

    def grad(self, t, z):
        return self.H @ (z - self._target(t))

    def quadratic_terms(self, t):
        x = self._target(t)
        return self.H, -self.H @ x, 0.5 * float(x @ self.H @ x)

    def params_key(self, t):
        return sum(t >= s for s in self.times)


base = dict(
    plant=PlantSpec(type="matrices", A=[[0.5]], B=[[1.0]], C=[[1.0]]),
    noise=NoiseSpec(seed=1, measurement={"low": -0.1, "high": 0.1}),
    controller=ControllerSpec(gamma=2.0 / 3.0, mu=2, n=1, q_mode="identity"),
    cost=CostSpec(type="quadratic",
                  params={"H": [[2.0, 0.0], [0.0, 1.0]], "target": [0.0, 0.0]}),
    offline=OfflineSpec(N=60, seed=3),
)

# each switch hops between the same two targets, so every switch adds the
# same amount of path length and a comparable transient
here, there = np.array([0.0, 0.0]), np.array([1.5, 3.0])

print("switches |  path length |   regret | regret/step at T")
for k in (1, 2, 4, 8):
    times = [0] + [100 * (i + 1) for i in range(k)]
    targets = [here] + [there if i % 2 == 0 else here for i in range(k)]
    cost = SwitchingCost(np.diag([2.0, 1.0]), targets, times)
    config = ExperimentConfig(horizon=4000, **base)
    record, _ = run_experiment(config, cost=cost)
    total, running = regret(record)
    pl = path_length(record.zeta, record.z_s_init)
    print(f"{k:8d} | {pl:12.3f} | {total:8.3f} | {running[-1] / 4001:.2e}")

print("\nregret grows with the path length, not with the horizon: with all")
print("switches in the first 800 steps, the per-step average at the end is")
print("tiny because the loop has long since parked at the final optimum.")
