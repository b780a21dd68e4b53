"""Batch experiment designs writing CSV results."""
from __future__ import annotations

import os
import tempfile
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .costs import BPRCost
from .fixtures import data_path, toy_demand, toy_network
from .interactions import (GenSpec, condition_number, generate_weights,
                           interpolate_symmetry, two_way_weights)
from .io import load_network, load_trips
from .metrics import (SNAPSHOT_FIELDS, ConvergenceLog, reference_equilibrium,
                      snapshot_rows, write_csv)
from .solvers import SolverConfig, solve
from .weights import WeightMatrix

DESIGNS = ("algorithms", "degrees", "symmetry-sweep", "metric-stabilization")
LAMBDAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
JOBS_ENV = "STAP_JOBS"

SUMMARY_FIELDS = ("instance_id", "network", "algorithm", "model_kind", "N", "lambda",
                  "seed", "status", "iterations", "final_gap", "iterations_to_1e-4",
                  "condition_number", "wall_seconds", "error")
CONVERGENCE_FIELDS = ("instance_id", "iteration", "gap", "objective", "wall_seconds")
TABLE_FIELDS = ("network", "seed", "gap_level", "algorithm", "delta_tstt_pct",
                "delta_vmt_pct", "pul_pct")


@dataclass(frozen=True)
class ExperimentSpec:
    design: str
    network: str = "sioux-falls"
    trips: str | None = None
    seeds: tuple[int, ...] = (0,)
    degrees: tuple[int, ...] = (0, 2, 4, 6)
    lambdas: tuple[float, ...] = LAMBDAS
    kind: str = "symmetric"
    interaction_degrees: int = 2  # N used by the algorithms and symmetry-sweep designs
    algorithms: tuple[str, ...] = ("msa", "fw", "gp")
    rg_target: float | None = None
    max_iterations: int = 1000
    diagonal_min: float = 0.55
    reference_rg: float = 1e-10
    reference_max_iterations: int = 200_000
    out_dir: str = "results"

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}; expected one of {DESIGNS}")
        if any(not 0.0 <= lam <= 1.0 for lam in self.lambdas):
            raise ValueError("lambda values must lie in [0, 1]")
        if any(n < 0 for n in self.degrees):
            raise ValueError("N values must be nonnegative")
        if self.kind not in ("symmetric", "asymmetric"):
            raise ValueError("kind must be symmetric or asymmetric")

    @property
    def target(self) -> float:
        if self.rg_target is not None:
            return self.rg_target
        return 1e-8 if self.design == "metric-stabilization" else 1e-6


@dataclass(frozen=True)
class Instance:
    network: str
    algorithm: str
    kind: str  # separable, symmetric, asymmetric or two-way
    degrees: int
    lam: float | None
    seed: int

    @property
    def id(self) -> str:
        lam = "na" if self.lam is None else f"{self.lam:g}"
        return (f"{self.network}-{self.algorithm}-{self.kind}-N{self.degrees}"
                f"-lam{lam}-s{self.seed}")


@dataclass
class InstanceResult:
    summary: dict
    convergence: list[dict] = field(default_factory=list)
    snapshots: list[dict] = field(default_factory=list)


def network_label(spec: ExperimentSpec) -> str:
    if spec.network in ("toy", "sioux-falls"):
        return spec.network
    return Path(spec.network).stem.replace("_net", "")


@lru_cache(maxsize=4)
def load_instance_data(network: str, trips: str | None):
    if network == "toy":
        return toy_network(), toy_demand()
    if network == "sioux-falls":
        network = str(data_path("SiouxFalls_net.tntp"))
        trips = trips or str(data_path("SiouxFalls_trips.tntp"))
    if trips is None:
        trips = network.replace("_net", "_trips")
    net = load_network(network)
    return net, load_trips(trips, zones=net.zones)


def plan(spec: ExperimentSpec) -> list[Instance]:
    label = network_label(spec)
    out = []
    for seed in spec.seeds:
        if spec.design == "algorithms":
            n = spec.interaction_degrees
            for kind in ("separable", "symmetric", "asymmetric"):
                for alg in spec.algorithms:
                    out.append(Instance(label, alg, kind, 0 if kind == "separable" else n,
                                        None, seed))
        elif spec.design == "degrees":
            for n in spec.degrees:
                kind = "separable" if n == 0 else spec.kind
                out.append(Instance(label, "gp", kind, n, None, seed))
        elif spec.design == "symmetry-sweep":
            n = spec.interaction_degrees
            for lam in spec.lambdas:
                out.append(Instance(label, "gp", "asymmetric", n, lam, seed))
        else:
            for alg in ("gp", "algb"):
                out.append(Instance(label, alg, "two-way", 1, None, seed))
    return out


def instance_weights(net, inst: Instance, diagonal_min: float) -> WeightMatrix:
    if inst.kind == "separable" or inst.degrees == 0:
        return WeightMatrix.identity(net.n_links)
    if inst.kind == "two-way":
        return two_way_weights(net, diagonal_min, inst.seed)
    w = generate_weights(net, GenSpec(inst.degrees, inst.kind == "symmetric",
                                      diagonal_min, inst.seed))
    if inst.lam is not None:
        w = interpolate_symmetry(w, inst.lam)
    return w


@lru_cache(maxsize=8)
def _reference(network, trips, seed, diagonal_min, rg, max_iterations):
    net, dm = load_instance_data(network, trips)
    w = two_way_weights(net, diagonal_min, seed)
    return reference_equilibrium(BPRCost(net, w), dm, rg=rg, max_iterations=max_iterations)


def run_instance(spec: ExperimentSpec, inst: Instance) -> InstanceResult:
    row = {"instance_id": inst.id, "network": inst.network, "algorithm": inst.algorithm,
           "model_kind": inst.kind, "N": inst.degrees,
           "lambda": "" if inst.lam is None else f"{inst.lam:g}", "seed": inst.seed,
           "status": "error", "iterations": "", "final_gap": "",
           "iterations_to_1e-4": "", "condition_number": "", "wall_seconds": "",
           "error": ""}
    started = time.perf_counter()
    try:
        net, dm = load_instance_data(spec.network, spec.trips)
        w = instance_weights(net, inst, spec.diagonal_min)
        model = BPRCost(net, w)
        log = ConvergenceLog()
        if spec.design == "metric-stabilization":
            log.reference = _reference(spec.network, spec.trips, inst.seed,
                                       spec.diagonal_min, spec.reference_rg,
                                       spec.reference_max_iterations)
        log.started = time.perf_counter()
        cfg = SolverConfig(inst.algorithm, rg_target=spec.target,
                           max_iterations=spec.max_iterations,
                           track_objective=model.symmetric)
        state, log = solve(model, dm, cfg, log)
        hit = log.iterations_to(1e-4)
        row.update(status="converged" if state.converged else "unconverged",
                   iterations=state.iterations, final_gap=repr(float(log.gaps[-1])),
                   **{"iterations_to_1e-4": "" if hit is None else hit},
                   condition_number=repr(condition_number(w).value))
        result = InstanceResult(row)
        for r in log.records:
            result.convergence.append({
                "instance_id": inst.id, "iteration": r.iteration,
                "gap": repr(float(r.gap)),
                "objective": "" if r.objective is None else repr(float(r.objective)),
                "wall_seconds": f"{r.wall_seconds:.6f}"})
        result.snapshots = snapshot_rows(log, inst.id, inst.algorithm, inst.kind,
                                         inst.degrees, row["lambda"])
    except Exception as exc:  # partial failures are recorded, the run continues
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        result = InstanceResult(row)
        traceback.print_exc()
    row["wall_seconds"] = f"{time.perf_counter() - started:.6f}"
    return result


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _run_and_store(spec: ExperimentSpec, inst: Instance) -> InstanceResult:
    res = run_instance(spec, inst)
    atomic_write(Path(spec.out_dir) / "instances" / f"{inst.id}.csv",
                 write_csv(res.convergence, CONVERGENCE_FIELDS))
    return res


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def table_rows(results: list[InstanceResult]) -> list[dict]:
    """Gap level by algorithm, deltas in absolute percent."""
    rows = []
    for res in results:
        s = res.summary
        for snap in res.snapshots:
            rows.append({"network": s["network"], "seed": s["seed"],
                         "gap_level": snap["gap_level"], "algorithm": s["algorithm"],
                         "delta_tstt_pct": f"{100 * abs(float(snap['delta_tstt'])):.2f}",
                         "delta_vmt_pct": f"{100 * abs(float(snap['delta_vmt'])):.2f}",
                         "pul_pct": f"{100 * float(snap['pul']):.2f}"})
    rows.sort(key=lambda r: (r["seed"], -float(r["gap_level"]), r["algorithm"]))
    return rows


def run_experiment(spec: ExperimentSpec, jobs: int | None = None) -> list[InstanceResult]:
    """Run every instance of the design and write the aggregate CSV files."""
    jobs = default_jobs() if jobs is None else jobs
    instances = plan(spec)
    if jobs > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_and_store, [spec] * len(instances), instances))
    else:
        results = [_run_and_store(spec, inst) for inst in instances]
    out = Path(spec.out_dir)
    atomic_write(out / "summary.csv", write_csv([r.summary for r in results], SUMMARY_FIELDS))
    atomic_write(out / "convergence.csv",
                 write_csv([c for r in results for c in r.convergence], CONVERGENCE_FIELDS))
    if spec.design == "metric-stabilization":
        atomic_write(out / "snapshots.csv",
                     write_csv([s for r in results for s in r.snapshots], SNAPSHOT_FIELDS))
        atomic_write(out / "tables.csv", write_csv(table_rows(results), TABLE_FIELDS))
    return results
