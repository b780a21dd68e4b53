"""A non-monotone two-link interaction with three equilibria, and a merge that stays monotone.

Run: python3 demos/multiple_equilibria.py
"""
# %%
import numpy as np

from stap.costs import MergeNode, jin_zhang_jacobian, jin_zhang_times
from stap.fixtures import nonmonotone_demo
from stap.metrics import relative_gap
from stap.solvers import SolverConfig, gp_solve

net, dm, model = nonmonotone_demo()
print("coefficients\n", model.W.toarray(), "\neigenvalues", np.linalg.eigvalsh(model.W.toarray()))

# %% Scan the feasible segment x1 + x2 = 10
for x1 in np.linspace(0, 10, 11):
    x = np.array([x1, 10 - x1])
    t = model.link_times(x)
    print(f"x = ({x1:4.1f}, {10 - x1:4.1f})  t = ({t[0]:5.1f}, {t[1]:5.1f})  "
          f"gap {relative_gap(model, x, dm):.3f}")

# %% Gradient projection lands on whichever boundary equilibrium it starts at
for start in ([0.0, 1.0], [1.0, 0.0]):
    state, log = gp_solve(model, dm, SolverConfig(initial_times=np.array(start)))
    print(f"start times {start}: flows {state.x}, gap {log.gaps[-1]}")

# %% The merge model: zero Jacobian below capacity, a rank-one PSD block above it
node = MergeNode(1.0, 2.0, 6.0)
for x1, x2 in ((2, 3), (4, 8)):
    print((x1, x2), jin_zhang_times(node, x1, x2), "\n", jin_zhang_jacobian(node, x1, x2))
