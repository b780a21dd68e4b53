"""How the interaction radius N and the symmetry mix lambda change GP convergence.

Run: python3 demos/interaction_degrees.py [--seeds 0,1,2]
"""
# %%
import argparse

from stap.costs import BPRCost
from stap.fixtures import sioux_falls
from stap.interactions import GenSpec, condition_number, generate_weights, interpolate_symmetry
from stap.solvers import SolverConfig, gp_solve

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", default="0")
args = parser.parse_args()
seeds = [int(s) for s in args.seeds.split(",")]

net, dm, separable = sioux_falls()


def iterations_to(model, level=1e-4):
    _, log = gp_solve(model, dm, SolverConfig(rg_target=level, track_objective=False))
    return log.iterations_to(level)


# %% Iterations to a 1e-4 gap for N = 0, 2, 4, 6
for seed in seeds:
    for symmetric in (True, False):
        line = []
        for n in (0, 2, 4, 6):
            w = generate_weights(net, GenSpec(n, symmetric, seed=seed))
            model = separable if n == 0 else BPRCost(net, w)
            line.append(f"N={n}: {iterations_to(model):3d} (cond {condition_number(w).value:.2f})")
        print(f"seed {seed} {'sym ' if symmetric else 'asym'}  " + "  ".join(line))

# %% Sweeping from the symmetrized matrix (lambda 0) to the raw asymmetric one (lambda 1)
for seed in seeds:
    base = generate_weights(net, GenSpec(2, False, seed=seed))
    sweep = {lam: iterations_to(BPRCost(net, interpolate_symmetry(base, lam)))
             for lam in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)}
    print(f"seed {seed} lambda sweep: {sweep}")
