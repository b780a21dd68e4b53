"""Algorithm B: origin-based equilibration on acyclic bushes."""
from __future__ import annotations

import warnings

import numpy as np

from ..graph import INF, Bush, UnreachableError, _dijkstra, shortest_path_costs
from ..io import DemandMatrix
from .base import FlowState, MainLoop, SolverConfig, starting_times
from .shift import newton_step

NODE_GAP_NOISE = 1e-14


def bush_labels(net, bush: Bush, times, bush_flow, used_only_max: bool = True):
    """Min labels over all bush links and max labels over links carrying flow.

    Nodes with no used incoming link get ``U = L`` and no max predecessor.
    """
    n = net.nodes
    o = bush.origin
    tail = net.tail_list
    incoming = net.incoming
    mask = bush.mask
    tl = times if isinstance(times, list) else np.asarray(times).tolist()
    used = (bush_flow > 0.0) if used_only_max else mask
    L = [INF] * n
    U = [-INF] * n
    lp = [-1] * n
    up = [-1] * n
    L[o] = U[o] = 0.0
    for v in bush.order:
        if v == o:
            continue
        for e in incoming[v]:
            if not mask[e]:
                continue
            u = tail[e]
            if L[u] == INF:
                continue
            c = L[u] + tl[e]
            if c < L[v] or (c == L[v] and e < lp[v]):
                L[v] = c
                lp[v] = e
            if used[e]:
                c = U[u] + tl[e]
                if c > U[v]:
                    U[v] = c
                    up[v] = e
        if up[v] < 0:
            U[v] = L[v]
    return L, U, lp, up


def update_bush(net, bush: Bush, times, bush_flow) -> int:
    """Drop unused non-tree links, then add shortcut links; returns links added."""
    L, _, lp, _ = bush_labels(net, bush, times, bush_flow)
    tree = np.zeros(net.n_links, dtype=bool)
    lp_arr = np.array(lp)
    tree[lp_arr[lp_arr >= 0]] = True
    keep = bush.mask & ((bush_flow > 0.0) | tree)
    bush.mask = keep
    bush.order = bush.topological_order()
    # longest-path labels over every remaining bush link
    _, U, _, _ = bush_labels(net, bush, times, bush_flow, used_only_max=False)
    o = bush.origin
    blocked = net.through_blocked
    tl = np.asarray(times).tolist()
    added = []
    for e in np.flatnonzero(~keep).tolist():
        i, j = net.tail_list[e], net.head_list[e]
        if j == o or (blocked[i] and i != o) or U[i] == -INF or U[j] == -INF:
            continue
        if U[i] + tl[e] < U[j]:
            added.append(e)
    if added:
        bush.mask[added] = True
        try:
            bush.order = bush.topological_order()
        except ValueError:
            warnings.warn(f"discarding bush additions for origin {o + 1}: cycle",
                          RuntimeWarning, stacklevel=2)
            bush.mask[added] = False
            bush.order = bush.topological_order()
            return 0
    return len(added)


def equilibrate_bush(model, bush: Bush, bush_flow, x, f, t, dg,
                     config: SolverConfig, stop_below: float) -> bool:
    """One sweep of min/max segment shifts in reverse topological order.

    Returns False (without shifting) once the largest relative node gap is
    at most ``stop_below``.
    """
    net = model.network
    o = bush.origin
    tail = net.tail_list
    L, U, lp, up = bush_labels(net, bush, t, bush_flow)
    worst = 0.0
    for v in bush.order:
        if up[v] >= 0 and L[v] > 0:
            worst = max(worst, (U[v] - L[v]) / L[v])
    if worst <= stop_below:
        return False
    for j in reversed(bush.order):
        if up[j] < 0 or up[j] == lp[j] or U[j] - L[j] <= NODE_GAP_NOISE * abs(U[j]):
            continue
        on_min = {j}
        v = j
        while v != o:
            v = tail[lp[v]]
            on_min.add(v)
        max_seg = []
        v = j
        while True:
            e = up[v]
            if e < 0:
                break
            max_seg.append(e)
            v = tail[e]
            if v in on_min:
                break
        if v not in on_min:
            continue
        min_seg = []
        m, v = v, j
        while v != m:
            e = lp[v]
            min_seg.append(e)
            v = tail[e]
        links = np.array(min_seg + max_seg, dtype=np.int64)
        signs = np.concatenate([np.ones(len(min_seg)), -np.ones(len(max_seg))])
        cap = float(bush_flow[max_seg].min())
        delta = newton_step(model, t, dg, links, signs, config.newton_damping, cap)
        if delta > 0.0:
            bush_flow[min_seg] += delta
            bush_flow[max_seg] -= delta
            model.apply_shift(x, f, t, dg, links, signs, delta)
    return True


def _initial_bushes(net, demand, times):
    bushes = {}
    tl = np.asarray(times, dtype=float).tolist()
    for o, row in demand.by_origin.items():
        labels, pred, settled = _dijkstra(net, o, tl)
        flow = np.zeros(net.n_links)
        node_flow = [0.0] * net.nodes
        for d, v in row:
            if d == o:
                continue
            if labels[d] == INF:
                raise UnreachableError(o, d)
            node_flow[d] += v
        for v in reversed(settled):
            q = node_flow[v]
            if q == 0.0 or v == o:
                continue
            e = pred[v]
            flow[e] += q
            node_flow[net.tail_list[e]] += q
        bushes[o] = (Bush.from_tree(net, o, pred), flow)
    return bushes


def algb_solve(model, demand: DemandMatrix, config: SolverConfig | None = None, log=None):
    """Bush-based equilibration, one origin at a time."""
    config = config or SolverConfig("algb")
    net = model.network
    loop = MainLoop(model, demand, config, log)
    bushes = _initial_bushes(net, demand, starting_times(model, config))
    stop_below = 0.1 * config.rg_target
    k = 0
    while True:
        k += 1
        x = np.zeros(model.n_links)
        for _, flow in bushes.values():
            x += flow
        f = model.effective_flows(x)
        t = model.times_from_effective(f)
        if loop.check(k, x, t, shortest_path_costs(net, demand, t)):
            break
        dg = model._dg(f)
        for bush, flow in bushes.values():
            update_bush(net, bush, t, flow)
            for _ in range(config.inner_iterations_per_main):
                if not equilibrate_bush(model, bush, flow, x, f, t, dg, config, stop_below):
                    break
    state = FlowState(x=x, t=t, bushes=bushes, converged=loop.converged,
                      gap=loop.last_gap, iterations=k)
    return state, loop.log
