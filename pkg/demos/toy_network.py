"""Four parallel links, one OD pair, five interaction patterns.

Run: python3 demos/toy_network.py
"""
# %%
import numpy as np

from stap.fixtures import TOY_SCENARIOS, toy, toy_coefficients
from stap.interactions import condition_number
from stap.solvers import SolverConfig, gp_solve

# %% [markdown]
# Each scenario is t = c + M x with c = (15, 10, 10, 15) and 60 trips.
# The coefficient rows are kept as printed (0.167 for a sixth).

# %%
for sc in TOY_SCENARIOS:
    print(sc)
    print(toy_coefficients(sc))

# %% Gradient projection from the all-or-nothing start
print(f"{'scenario':20s} {'iter':>4s} {'gap':>10s}  flows")
for sc in TOY_SCENARIOS:
    _, dm, model = toy(sc)
    state, log = gp_solve(model, dm, SolverConfig(rg_target=1e-10, max_iterations=50))
    for rec in log.records[:4]:
        print(f"{sc:20s} {rec.iteration:4d} {rec.gap:10.4f}")
    print(f"{'':20s} {log.iterations:4d} {log.gaps[-1]:10.2e}  {np.round(state.x, 3)}")

# %% Conditioning of the symmetric and asymmetric full-interaction matrices
for sc in ("symmetric-full", "asymmetric-full"):
    c = condition_number(toy_coefficients(sc))
    print(f"{sc}: {c.value:.4f} ({c.convention}); singular values give {c.singular_ratio:.4f}")
