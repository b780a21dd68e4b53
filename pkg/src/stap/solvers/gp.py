"""Path-based gradient projection with Gauss-Seidel time updates."""
from __future__ import annotations

import numpy as np

from ..graph import INF, UnreachableError, _dijkstra, shortest_path_costs, trace_path
from .base import FlowState, MainLoop, SolverConfig, starting_times
from .shift import newton_step, shift_direction


def _initial_paths(net, demand, times):
    paths = {}
    tl = np.asarray(times, dtype=float).tolist()
    for o, row in demand.by_origin.items():
        labels, pred, _ = _dijkstra(net, o, tl)
        for d, v in row:
            if d == o:
                continue
            if labels[d] == INF:
                raise UnreachableError(o, d)
            paths[(o, d)] = {trace_path(net, pred, o, d): v}
    return paths


def _link_flows(paths, n):
    x = np.zeros(n)
    for pset in paths.values():
        for p, h in pset.items():
            x[list(p)] += h
    return x


def equilibrate_od(model, net, o, d, pset, x, f, t, dg, config) -> None:
    """One gradient-projection pass over the stored paths of a single OD pair."""
    _, pred, _ = _dijkstra(net, o, t.tolist(), target=d)
    best = trace_path(net, pred, o, d)
    pset.setdefault(best, 0.0)
    for p in [q for q in pset if q != best]:
        h = pset[p]
        links, signs = shift_direction(best, p)
        delta = newton_step(model, t, dg, links, signs, config.newton_damping, h)
        if delta > 0.0:
            model.apply_shift(x, f, t, dg, links, signs, delta)
            pset[p] = h - delta
            pset[best] += delta
        if pset[p] < config.path_flow_drop_tol:
            rest = pset.pop(p)
            if rest > 0.0:
                model.apply_shift(x, f, t, dg, links, signs, rest)
                pset[best] += rest


def gp_solve(model, demand, config: SolverConfig | None = None, log=None):
    """Gradient projection: shift each OD pair's flow onto its current shortest path."""
    config = config or SolverConfig("gp")
    net = model.network
    loop = MainLoop(model, demand, config, log)
    paths = _initial_paths(net, demand, starting_times(model, config))
    k = 0
    while True:
        k += 1
        # rebuild from path flows so rounding from incremental updates never accumulates
        x = _link_flows(paths, model.n_links)
        f = model.effective_flows(x)
        t = model.times_from_effective(f)
        if loop.check(k, x, t, shortest_path_costs(net, demand, t)):
            break
        dg = model._dg(f)
        for (o, d), pset in paths.items():
            equilibrate_od(model, net, o, d, pset, x, f, t, dg, config)
    state = FlowState(x=x, t=t, paths=paths, converged=loop.converged,
                      gap=loop.last_gap, iterations=k)
    return state, loop.log
