"""TSTT, VMT and unconverged-link share against a tight reference, by gap level.

Run: python3 demos/metric_stabilization.py [--jobs 2] [--out results/stabilization]
"""
# %%
import argparse

from stap.experiments import ExperimentSpec, run_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--jobs", type=int, default=2)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="results/stabilization")
args = parser.parse_args()

# %% Gradient projection and Algorithm B on Sioux Falls with two-way link weights
results = run_experiment(ExperimentSpec("metric-stabilization", seeds=(args.seed,),
                                        out_dir=args.out), jobs=args.jobs)

# %%
print(f"{'gap':>7s} {'alg':5s} {'iter':>5s} {'dTSTT%':>8s} {'dVMT%':>8s} {'PUL%':>6s}")
for res in results:
    for s in res.snapshots:
        print(f"{s['gap_level']:>7s} {res.summary['algorithm']:5s} {s['iteration']:5d} "
              f"{100 * abs(float(s['delta_tstt'])):8.3f} {100 * abs(float(s['delta_vmt'])):8.3f} "
              f"{100 * float(s['pul']):6.2f}")
print(f"CSV files in {args.out}")
