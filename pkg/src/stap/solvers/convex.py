"""Convex-combination methods: method of successive averages and Frank-Wolfe."""
from __future__ import annotations

import numpy as np

from ..graph import all_or_nothing
from .base import FlowState, MainLoop, SolverConfig, initial_aon

BISECTION_WIDTH = 1e-10


def msa_step(k: int) -> float:
    """Step size at main iteration k (1-based): 1/2, 1/3, 1/4, ..."""
    return 1.0 / (k + 1)


def fw_step(model, x, direction) -> float:
    """Zero of t(x + s d) . d on [0, 1], or the endpoint where it keeps its sign."""
    def slope(s):
        return float(model.link_times(x + s * direction) @ direction)

    if slope(0.0) >= 0.0:
        return 0.0
    if slope(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _convex_solve(model, demand, config, log, choose_step):
    net = model.network
    loop = MainLoop(model, demand, config, log)
    x = initial_aon(model, demand, config)
    k = 0
    while True:
        k += 1
        t = model.link_times(x)
        target, sptt = all_or_nothing(net, demand, t)
        if loop.check(k, x, t, sptt):
            break
        step = choose_step(k, x, target - x)
        x = x + step * (target - x)
    if not loop.converged and loop.best_x is not None:
        x = loop.best_x
    state = FlowState(x=x, t=model.link_times(x), converged=loop.converged,
                      gap=loop.last_gap if loop.converged else loop.best_gap,
                      iterations=k)
    return state, loop.log


def msa_solve(model, demand, config: SolverConfig | None = None, log=None):
    """Method of successive averages; unconverged runs return the lowest-gap iterate."""
    config = config or SolverConfig("msa")
    return _convex_solve(model, demand, config, log, lambda k, x, d: msa_step(k))


def fw_solve(model, demand, config: SolverConfig | None = None, log=None):
    """Frank-Wolfe with an exact bisection line search on the step size."""
    config = config or SolverConfig("fw")
    return _convex_solve(model, demand, config, log,
                         lambda k, x, d: fw_step(model, x, d))
