"""Command-line entry point: ``stap <command> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .costs import BPRCost, MergeNode, jin_zhang_jacobian, jin_zhang_times
from .experiments import (DESIGNS, JOBS_ENV, ExperimentSpec, atomic_write,
                          default_jobs, run_experiment)
from .fixtures import TOY_SCENARIOS, toy_coefficients
from .graph import UnreachableError
from .interactions import GenSpec, condition_number, generate_weights, two_way_weights
from .io import TNTPError, load_network, load_trips, load_weights
from .metrics import write_csv
from .solvers import ALGORITHMS, SolverConfig, solve
from .weights import WeightError, WeightMatrix, write_weights

EXIT_OK, EXIT_UNCONVERGED, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (TNTPError, WeightError, UnreachableError, OSError, ValueError)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def cmd_solve(args) -> int:
    net = load_network(args.net)
    dm = load_trips(args.trips, zones=net.zones)
    weights = None
    if args.weights:
        weights = load_weights(args.weights, validate=not args.unchecked_weights)
    model = BPRCost(net, weights)
    cfg = SolverConfig(args.algorithm, rg_target=args.rg, max_iterations=args.max_iters,
                       newton_damping=args.damping,
                       inner_iterations_per_main=args.inner_iters,
                       track_objective=model.symmetric)
    state, log = solve(model, dm, cfg)
    out = Path(args.out)
    flows = "link flow time\n" + "".join(
        f"{a + 1} {x!r} {t!r}\n" for a, (x, t) in
        enumerate(zip(state.x.tolist(), state.t.tolist())))
    atomic_write(out / "flows.txt", flows)
    rows = [{"iteration": r.iteration, "gap": repr(float(r.gap)),
             "objective": "" if r.objective is None else repr(float(r.objective)),
             "wall_seconds": f"{r.wall_seconds:.6f}"} for r in log.records]
    atomic_write(out / "convergence.csv",
                 write_csv(rows, ("iteration", "gap", "objective", "wall_seconds")))
    last = log.records[-1]
    summary = {
        "algorithm": args.algorithm,
        "converged": state.converged,
        "iterations": state.iterations,
        "first_gap": float(log.records[0].gap),
        "final_gap": float(last.gap),
        "objective": None if last.objective is None else float(last.objective),
        "tstt": float(state.t @ state.x),
        "vmt": float(net.length @ state.x),
    }
    atomic_write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    print(f"iteration 1 relative gap: {summary['first_gap']:.4f}")
    print(f"final relative gap: {summary['final_gap']:.3e} after "
          f"{summary['iterations']} iterations "
          f"({'converged' if state.converged else 'NOT converged'})")
    if summary["objective"] is not None:
        print(f"objective: {summary['objective']:.10g}")
    return EXIT_OK if state.converged else EXIT_UNCONVERGED


def cmd_genweights(args) -> int:
    net = load_network(args.net)
    if args.two_way:
        w = two_way_weights(net, args.diag_min, args.seed)
    else:
        w = generate_weights(net, GenSpec(args.N, not args.asymmetric, args.diag_min,
                                          args.seed))
    atomic_write(Path(args.out), write_weights(w))
    print(f"wrote {w.n} x {w.n} weights ({w.nnz} stored entries) to {args.out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = ExperimentSpec(
        design=args.design, network=args.net, trips=args.trips, seeds=args.seeds,
        degrees=args.N, lambdas=args.lambdas, kind=args.kind,
        interaction_degrees=args.interaction_N,
        algorithms=args.algorithms, rg_target=args.rg, max_iterations=args.max_iters,
        diagonal_min=args.diag_min, reference_rg=args.reference_rg,
        reference_max_iterations=args.reference_max_iters, out_dir=args.out)
    results = run_experiment(spec, jobs=args.jobs)
    failed = [r for r in results if r.summary["status"] == "error"]
    for r in results:
        s = r.summary
        print(f"{s['instance_id']}: {s['status']} iterations={s['iterations']} "
              f"gap={s['final_gap']} {s['error']}".rstrip())
    print(f"{len(results)} instances, {len(failed)} failed; results in {args.out}")
    return EXIT_INPUT if failed and len(failed) == len(results) else EXIT_OK


def cmd_merge_demo(args) -> int:
    t01, t02 = _floats(args.t0)
    node = MergeNode(t01, t02, args.u3, args.delay_coeff)
    top = args.max_flow if args.max_flow is not None else 2.0 * args.u3
    grid = np.linspace(0.0, top, args.grid)
    worst = np.inf
    lines = ["x1 x2 t1 t2 j11 j12 j21 j22"]
    for x1 in grid.tolist():
        for x2 in grid.tolist():
            t1, t2 = jin_zhang_times(node, x1, x2)
            jac = jin_zhang_jacobian(node, x1, x2)
            worst = min(worst, float(np.linalg.eigvalsh(0.5 * (jac + jac.T)).min()))
            lines.append(f"{x1:.6g} {x2:.6g} {t1:.6g} {t2:.6g} "
                         + " ".join(f"{v:.6g}" for v in jac.ravel()))
    if args.table:
        print("\n".join(lines))
    ok = worst >= -1e-12
    print(f"min eigenvalue of symmetrized Jacobian over {args.grid}x{args.grid} grid: "
          f"{worst:.3e} ({'PSD' if ok else 'NOT PSD'})")
    return EXIT_OK if ok else EXIT_UNCONVERGED


def cmd_condnum(args) -> int:
    if args.toy:
        w = toy_coefficients(args.toy, exact=args.exact)
    else:
        w = load_weights(args.weights, validate=not args.unchecked_weights)
    c = condition_number(w if isinstance(w, WeightMatrix) else np.asarray(w))
    print(f"{c.value:.6g}")
    print(f"convention: {c.convention}; singular-value ratio {c.singular_ratio:.6g}",
          file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stap",
                                description="Static traffic assignment with link interactions")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--net", required=True)
    s.add_argument("--trips", required=True)
    s.add_argument("--algorithm", choices=ALGORITHMS, default="gp")
    s.add_argument("--weights")
    s.add_argument("--unchecked-weights", action="store_true",
                   help="accept weight rows that do not sum to one")
    s.add_argument("--rg", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=1000)
    s.add_argument("--damping", type=float, default=1.0)
    s.add_argument("--inner-iters", type=int, default=20)
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("genweights", help="generate an interaction weight file")
    g.add_argument("--net", required=True)
    g.add_argument("--N", type=int, default=2)
    sym = g.add_mutually_exclusive_group()
    sym.add_argument("--symmetric", action="store_true")
    sym.add_argument("--asymmetric", action="store_true")
    sym.add_argument("--two-way", action="store_true",
                     help="pair each link only with its opposite-direction link")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--diag-min", type=float, default=0.55)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_genweights)

    e = sub.add_parser("experiment", help="run an experiment design")
    e.add_argument("--design", choices=DESIGNS, required=True)
    e.add_argument("--net", default="sioux-falls",
                   help="'toy', 'sioux-falls' or a path to a *_net.tntp file")
    e.add_argument("--trips")
    e.add_argument("--seeds", type=_ints, default=(0,))
    e.add_argument("--N", type=_ints, default=(0, 2, 4, 6))
    e.add_argument("--interaction-N", type=int, default=2)
    e.add_argument("--lambdas", type=_floats, default=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0))
    e.add_argument("--kind", choices=("symmetric", "asymmetric"), default="symmetric")
    e.add_argument("--algorithms", type=lambda t: tuple(t.split(",")),
                   default=("msa", "fw", "gp"))
    e.add_argument("--rg", type=float)
    e.add_argument("--max-iters", type=int, default=1000)
    e.add_argument("--diag-min", type=float, default=0.55)
    e.add_argument("--reference-rg", type=float, default=1e-10)
    e.add_argument("--reference-max-iters", type=int, default=200_000)
    e.add_argument("--jobs", type=int, default=None,
                   help=f"worker processes (default ${JOBS_ENV} or 1)")
    e.add_argument("--out", default="results")
    e.set_defaults(func=cmd_experiment)

    m = sub.add_parser("merge-demo", help="tabulate the proportional merge model")
    m.add_argument("--t0", required=True, help="free-flow times of the two inflows, 'a,b'")
    m.add_argument("--u3", type=float, required=True)
    m.add_argument("--grid", type=int, default=100)
    m.add_argument("--max-flow", type=float)
    m.add_argument("--delay-coeff", type=float, default=1.0)
    m.add_argument("--table", action="store_true")
    m.set_defaults(func=cmd_merge_demo)

    c = sub.add_parser("condnum", help="condition number of a weight matrix")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--weights")
    src.add_argument("--toy", choices=TOY_SCENARIOS)
    c.add_argument("--exact", action="store_true")
    c.add_argument("--unchecked-weights", action="store_true")
    c.set_defaults(func=cmd_condnum)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "jobs", 0) is None:
        args.jobs = default_jobs()
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
