# K-medoid QUBO and the software annealer.
#
# Energy E(z) = z' Q z + c' z with Q = gamma 11' - (alpha/2) Delta and
# c = beta Delta 1 - 2 gamma k 1. The gamma part equals
# gamma ((sum z - k)^2 - k^2), so it pulls the selection towards k exemplars.

# %%
import numpy as np

from marketqubo import (
    AnnealConfig,
    build_kmedoid_qubo,
    cardinality_penalty_decomposition,
    solve_anneal,
    solve_exhaustive,
)
from marketqubo.market_graph import robust_delta

rng = np.random.default_rng(1)
points = np.concatenate([rng.normal(c, 0.05, (5, 2)) for c in ([0, 0], [1, 0], [0, 1])])
dist = np.linalg.norm(points[:, None] - points[None], axis=-1)
problem = build_kmedoid_qubo(robust_delta(dist), k=3)
print("alpha, beta, gamma, k =", problem.params)

# %%
# 15 variables: small enough to enumerate all 32768 states.
exact = solve_exhaustive(problem)
print("exhaustive:", exact.best.exemplars, exact.best_energy)

anneal = solve_anneal(problem, AnnealConfig(sweeps=200, restarts=20, seed=0))
print("annealed:  ", anneal.best.exemplars, anneal.best_energy, "feasible", anneal.feasible)
print("clusters of the exemplars:", [i // 5 for i in anneal.best.exemplars])

# %%
penalty, medoid = cardinality_penalty_decomposition(problem, anneal.best.z)
print(f"penalty {penalty:.3f} (= -gamma k^2 = {-2 * 9})  medoid part {medoid:.4f}")

# %%
# Running best over restarts never increases.
print(np.round(anneal.energy_trace, 6))
