"""MSA, Frank-Wolfe, gradient projection and Algorithm B on Sioux Falls.

Run: python3 demos/sioux_falls_algorithms.py [--out gaps.csv]
"""
# %%
import argparse

from stap.costs import BPRCost
from stap.fixtures import sioux_falls
from stap.interactions import GenSpec, generate_weights
from stap.metrics import write_csv
from stap.solvers import SolverConfig, solve

parser = argparse.ArgumentParser()
parser.add_argument("--out", help="write every iteration's gap to this CSV")
parser.add_argument("--iterations", type=int, default=200)
args = parser.parse_args()

net, dm, separable = sioux_falls()
models = {
    "separable": separable,
    "symmetric N=2": BPRCost(net, generate_weights(net, GenSpec(2, True, seed=0))),
    "asymmetric N=2": BPRCost(net, generate_weights(net, GenSpec(2, False, seed=0))),
}

# %% Gap after selected iterations
rows = []
checkpoints = sorted({k for k in (1, 5, 10, 20, 50, 100) if k < args.iterations}
                     | {args.iterations})
print(f"{'model':16s} {'alg':5s} " + " ".join(f"{k:>9d}" for k in checkpoints))
for name, model in models.items():
    for alg in ("msa", "fw", "gp", "algb"):
        cfg = SolverConfig(alg, rg_target=1e-12, max_iterations=args.iterations,
                           track_objective=False)
        _, log = solve(model, dm, cfg)
        gaps = log.gaps
        cells = [f"{gaps[k - 1]:9.1e}" if k <= len(gaps) else f"{'':>9s}" for k in checkpoints]
        print(f"{name:16s} {alg:5s} " + " ".join(cells))
        rows += [{"model": name, "algorithm": alg, "iteration": r.iteration,
                  "gap": repr(r.gap), "wall_seconds": f"{r.wall_seconds:.4f}"}
                 for r in log.records]

# %%
if args.out:
    with open(args.out, "w") as fh:
        fh.write(write_csv(rows, ("model", "algorithm", "iteration", "gap", "wall_seconds")))
    print(f"wrote {len(rows)} rows to {args.out}")
