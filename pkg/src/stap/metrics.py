"""Convergence measures: relative gap, TSTT, VMT and link-level convergence."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import shortest_path_costs

GAP_LEVELS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)

SNAPSHOT_FIELDS = ("instance_id", "algorithm", "model_kind", "N", "lambda",
                   "gap_level", "iteration", "delta_tstt", "delta_vmt", "pul",
                   "wall_seconds")


def relative_gap(model, x, demand, times=None) -> float:
    """(TSTT - SPTT) / SPTT at the link times implied by ``x``."""
    if demand.total == 0:
        return 0.0
    x = np.asarray(x, dtype=float)
    t = model.link_times(x) if times is None else times
    sptt = shortest_path_costs(model.network, demand, t)
    return gap_from(float(t @ x), sptt)


def gap_from(tstt_value: float, sptt: float) -> float:
    if sptt == 0:
        return 0.0 if tstt_value == 0 else float("inf")
    rg = (tstt_value - sptt) / sptt
    if -1e-12 <= rg < 0:
        return 0.0
    return rg


def tstt(x, t) -> float:
    return float(np.dot(x, t))


def vmt(x, lengths) -> float:
    return float(np.dot(x, lengths))


def delta_metrics(x, x_ref, model, lengths, times=None, ref_times=None):
    """Signed relative TSTT and VMT differences from a reference solution."""
    t = model.link_times(x) if times is None else times
    t_ref = model.link_times(x_ref) if ref_times is None else ref_times
    ref_tstt, ref_vmt = tstt(x_ref, t_ref), vmt(x_ref, lengths)
    if ref_tstt == 0 or ref_vmt == 0:
        raise ValueError("reference TSTT or VMT is zero")
    return (tstt(x, t) - ref_tstt) / ref_tstt, (vmt(x, lengths) - ref_vmt) / ref_vmt


def default_zero_tol(total_demand: float, n_links: int) -> float:
    return 1e-9 * total_demand / n_links


def pul(x, x_ref, epsilon: float = 0.01, zero_tol: float = 0.0) -> float:
    """Proportion of links whose flow is not within ``epsilon`` of the reference."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    positive = x_ref > zero_tol
    ok = np.where(positive, np.abs(x - x_ref) < epsilon * x_ref, np.abs(x) < zero_tol)
    if zero_tol == 0:
        ok = np.where(positive, ok, x == 0)
    return 1.0 - float(ok.sum()) / x.size


@dataclass
class MetricReport:
    gap_level: float
    delta_tstt: float
    delta_vmt: float
    pul: float
    epsilon: float
    iteration: int = 0
    gap: float = float("nan")
    wall_seconds: float = 0.0


@dataclass
class IterationRecord:
    iteration: int
    gap: float
    objective: float | None
    wall_seconds: float


@dataclass
class Reference:
    """Reference equilibrium used for the delta metrics."""

    x: np.ndarray
    gap: float
    lengths: np.ndarray
    times: np.ndarray
    epsilon: float = 0.01
    zero_tol: float = 0.0


@dataclass
class ConvergenceLog:
    """Per-iteration gaps plus metric snapshots at first crossings of each level."""

    reference: Reference | None = None
    model: object = None
    levels: tuple[float, ...] = GAP_LEVELS
    records: list[IterationRecord] = field(default_factory=list)
    snapshots: list[MetricReport] = field(default_factory=list)
    crossings: dict[float, int] = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)

    def record(self, iteration, gap, objective=None, x=None, times=None):
        wall = time.perf_counter() - self.started
        self.records.append(IterationRecord(iteration, gap, objective, wall))
        for level in self.levels:
            if level in self.crossings or gap > level:
                continue
            self.crossings[level] = iteration
            if self.reference is not None and x is not None:
                self.snapshots.append(self._snapshot(level, iteration, gap, x, times, wall))

    def _snapshot(self, level, iteration, gap, x, times, wall):
        ref = self.reference
        d_tstt, d_vmt = delta_metrics(x, ref.x, self.model, ref.lengths,
                                      times=times, ref_times=ref.times)
        return MetricReport(level, d_tstt, d_vmt,
                            pul(x, ref.x, ref.epsilon, ref.zero_tol),
                            ref.epsilon, iteration, gap, wall)

    @property
    def gaps(self) -> list[float]:
        return [r.gap for r in self.records]

    @property
    def iterations(self) -> int:
        return len(self.records)

    def iterations_to(self, level: float) -> int | None:
        """First iteration whose starting gap is at or below ``level``."""
        for r in self.records:
            if r.gap <= level:
                return r.iteration
        return None

    def snapshot(self, level: float) -> MetricReport | None:
        for s in self.snapshots:
            if s.gap_level == level:
                return s
        return None


def reference_equilibrium(model, demand, rg: float = 1e-10,
                          max_iterations: int = 200_000, lengths=None,
                          epsilon: float = 0.01, time_limit: float | None = None):
    """Solve with gradient projection to a tight gap for use as the reference."""
    from .solvers import SolverConfig, gp_solve

    cfg = SolverConfig("gp", rg_target=rg, max_iterations=max_iterations,
                       time_limit=time_limit, track_objective=False)
    state, log = gp_solve(model, demand, cfg)
    lengths = model.network.length if lengths is None else np.asarray(lengths)
    return Reference(state.x.copy(), log.gaps[-1], lengths, model.link_times(state.x),
                     epsilon, default_zero_tol(demand.total, model.n_links))


def snapshot_rows(log: ConvergenceLog, instance_id: str, algorithm: str,
                  model_kind: str, n_degrees, lam) -> list[dict]:
    """CSV rows for each snapshot; deltas keep their sign here."""
    rows = []
    for s in log.snapshots:
        rows.append({
            "instance_id": instance_id, "algorithm": algorithm,
            "model_kind": model_kind, "N": n_degrees, "lambda": lam,
            "gap_level": f"{s.gap_level:.0e}", "iteration": s.iteration,
            "delta_tstt": repr(float(s.delta_tstt)),
            "delta_vmt": repr(float(s.delta_vmt)),
            "pul": repr(float(s.pul)), "wall_seconds": f"{s.wall_seconds:.6f}",
        })
    return rows


def write_csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def read_snapshot_csv(text: str) -> list[dict]:
    """Parse and type-check a snapshot CSV; rejects missing columns and NaN/Inf."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SNAPSHOT_FIELDS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    rows = []
    for r in reader:
        out = dict(r)
        for k in ("gap_level", "delta_tstt", "delta_vmt", "pul", "wall_seconds"):
            v = float(r[k])
            if not np.isfinite(v):
                raise ValueError(f"non-finite {k} in row {r}")
            out[k] = v
        out["iteration"] = int(r["iteration"])
        rows.append(out)
    return rows


def report_dict(s: MetricReport) -> dict:
    return asdict(s)


def mean_flow_capacity_ratio(x, network) -> float:
    """Average x/c over links that are not centroid connectors."""
    keep = ~network.is_connector
    return float(np.mean(np.asarray(x)[keep] / network.capacity[keep]))
