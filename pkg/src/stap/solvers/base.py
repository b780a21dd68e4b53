"""Shared solver state, configuration and the main-iteration driver."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..graph import all_or_nothing
from ..metrics import ConvergenceLog, gap_from

ALGORITHMS = ("msa", "fw", "gp", "algb")


@dataclass
class SolverConfig:
    algorithm: str = "gp"
    rg_target: float = 1e-8
    max_iterations: int = 1000
    newton_damping: float = 1.0
    path_flow_drop_tol: float = 1e-12
    inner_iterations_per_main: int = 20
    time_limit: float | None = None
    track_objective: bool = True
    initial_times: np.ndarray | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; "
                             f"expected one of {', '.join(ALGORITHMS)}")
        if not self.rg_target > 0:
            raise ValueError("rg_target must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.newton_damping <= 1:
            raise ValueError("newton_damping must be in (0, 1]")
        if self.inner_iterations_per_main < 1:
            raise ValueError("inner_iterations_per_main must be at least 1")


@dataclass
class FlowState:
    x: np.ndarray
    t: np.ndarray
    paths: dict | None = None  # (origin, dest) -> {link tuple: flow}
    bushes: dict | None = None  # origin -> (Bush, bush link flows)
    converged: bool = False
    gap: float = float("inf")
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def path_flow_totals(self) -> np.ndarray:
        """Link flows rebuilt from the stored path flows."""
        x = np.zeros_like(self.x)
        for pset in (self.paths or {}).values():
            for p, h in pset.items():
                x[list(p)] += h
        return x


def starting_times(model, config: SolverConfig) -> np.ndarray:
    if config.initial_times is not None:
        t = np.asarray(config.initial_times, dtype=float)
        if t.shape != (model.n_links,):
            raise ValueError("initial_times has the wrong length")
        return t
    return model.link_times(np.zeros(model.n_links))


def initial_aon(model, demand, config):
    x, _ = all_or_nothing(model.network, demand, starting_times(model, config))
    return x


class MainLoop:
    """Evaluates the gap at the start of each main iteration and decides when to stop."""

    def __init__(self, model, demand, config: SolverConfig, log: ConvergenceLog | None):
        self.model = model
        self.demand = demand
        self.config = config
        if log is None:
            log = ConvergenceLog()
        if log.model is None:
            log.model = model
        self.log = log
        self.start = time.perf_counter()
        self.best_gap = float("inf")
        self.best_x = None

    def check(self, k: int, x, t, sptt: float) -> bool:
        """Record iteration ``k``; True means stop before updating."""
        gap = 0.0 if self.demand.total == 0 else gap_from(float(t @ x), sptt)
        obj = None
        if self.config.track_objective and self.demand.total > 0:
            obj = self.model.objective(x)
        self.log.record(k, gap, obj, x=x, times=t)
        self.last_gap = gap
        if gap < self.best_gap:
            self.best_gap = gap
            self.best_x = x.copy()
        if gap <= self.config.rg_target:
            self.converged = True
            return True
        self.converged = False
        if k >= self.config.max_iterations:
            return True
        limit = self.config.time_limit
        return limit is not None and time.perf_counter() - self.start > limit
