"""Shortest paths, path and bush structures, all-or-nothing loading."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .io import DemandMatrix, Network

INF = float("inf")


class UnreachableError(RuntimeError):
    def __init__(self, origin: int, destination: int):
        self.origin = origin
        self.destination = destination
        super().__init__(f"no path from zone {origin + 1} to zone {destination + 1}")


@dataclass(frozen=True)
class Path:
    origin: int
    destination: int
    links: tuple[int, ...]

    def check(self, network: Network) -> None:
        tail, head = network.tail, network.head
        if not self.links:
            if self.origin != self.destination:
                raise ValueError("empty path between distinct nodes")
            return
        if tail[self.links[0]] != self.origin or head[self.links[-1]] != self.destination:
            raise ValueError("path endpoints do not match origin/destination")
        seen = {self.origin}
        for a, b in zip(self.links, self.links[1:]):
            if head[a] != tail[b]:
                raise ValueError(f"links {a + 1} and {b + 1} are not consecutive")
        for a in self.links:
            if int(head[a]) in seen:
                raise ValueError("path revisits a node")
            seen.add(int(head[a]))

    def cost(self, times) -> float:
        return float(np.sum(np.asarray(times)[list(self.links)]))


def shortest_paths(network: Network, origin: int, times, target: int | None = None):
    """Label-setting shortest paths from ``origin``.

    Returns ``(labels, pred)`` where ``pred[v]`` is the index of the last
    link on the chosen path to ``v`` (-1 if none).  Among equal-cost
    alternatives the lowest predecessor link index wins.  Zones below the
    first through node are never used as intermediate nodes.  With
    ``target`` set, the search stops once every label up to the target's is final.
    """
    labels, pred, _ = _dijkstra(network, origin, times, target)
    return np.array(labels), np.array(pred, dtype=np.int64)


def _dijkstra(network: Network, origin: int, times, target: int | None = None):
    if not isinstance(times, list):
        times = np.asarray(times, dtype=float).tolist()
    n = network.nodes
    labels = [INF] * n
    pred = [-1] * n
    done = [False] * n
    adj = network.adjacency
    heads = network.head_list
    settled = []
    blocked = network.through_blocked
    labels[origin] = 0.0
    heap = [(0.0, origin)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d > labels[v]:
            continue
        # keep going through equal labels so zero-cost ties resolve the same way
        if target is not None and done[target] and d > labels[target]:
            break
        done[v] = True
        settled.append(v)
        if v != origin and blocked[v]:
            continue
        for e in adj[v]:
            w = heads[e]
            if done[w]:
                continue
            nd = d + times[e]
            lw = labels[w]
            if nd < lw:
                labels[w] = nd
                pred[w] = e
                heapq.heappush(heap, (nd, w))
            elif nd == lw and e < pred[w]:
                pred[w] = e
    return labels, pred, settled


def trace_path(network: Network, pred, origin: int, destination: int) -> tuple[int, ...]:
    links = []
    v = destination
    tail = network.tail
    while v != origin:
        e = int(pred[v])
        if e < 0:
            raise UnreachableError(origin, destination)
        links.append(e)
        v = int(tail[e])
    return tuple(reversed(links))


def all_or_nothing(network: Network, demand: DemandMatrix, times):
    """Load every OD pair onto its current shortest path.

    Returns ``(x_star, sptt)`` with ``sptt = sum_rs d_rs * kappa_rs``.
    """
    x = np.zeros(network.n_links)
    sptt = 0.0
    tail = network.tail_list
    tlist = np.asarray(times, dtype=float).tolist()
    for o, row in demand.by_origin.items():
        labels, pred, settled = _dijkstra(network, o, tlist)
        node_flow = [0.0] * network.nodes
        for d, v in row:
            if d == o:
                continue
            if labels[d] == INF:
                raise UnreachableError(o, d)
            node_flow[d] += v
            sptt += v * labels[d]
        # push flows back along the tree, children before parents
        for v in reversed(settled):
            q = node_flow[v]
            if q == 0.0 or v == o:
                continue
            e = pred[v]
            x[e] += q
            node_flow[tail[e]] += q
    return x, sptt


def shortest_path_costs(network: Network, demand: DemandMatrix, times) -> float:
    """sum_rs d_rs * kappa_rs at the given link times."""
    tlist = np.asarray(times, dtype=float).tolist()
    total = 0.0
    for o, row in demand.by_origin.items():
        labels, _ = shortest_paths(network, o, tlist)
        for d, v in row:
            if d == o:
                continue
            if not np.isfinite(labels[d]):
                raise UnreachableError(o, d)
            total += v * labels[d]
    return total


class Bush:
    """Origin-rooted acyclic link subset (as a boolean mask)."""

    def __init__(self, network: Network, origin: int, mask):
        self.network = network
        self.origin = origin
        self.mask = np.asarray(mask, dtype=bool).copy()
        self.order = self.topological_order()

    @classmethod
    def from_tree(cls, network: Network, origin: int, pred) -> Bush:
        mask = np.zeros(network.n_links, dtype=bool)
        p = np.asarray(pred)
        mask[p[p >= 0]] = True
        return cls(network, origin, mask)

    def links(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def topological_order(self) -> list[int]:
        """Kahn's algorithm over nodes reachable in the bush; raises on cycles."""
        net = self.network
        indeg = np.zeros(net.nodes, dtype=np.int64)
        idx = self.links()
        np.add.at(indeg, net.head[idx], 1)
        out = [[] for _ in range(net.nodes)]
        for e in idx.tolist():
            out[int(net.tail[e])].append(int(net.head[e]))
        ready = [v for v in range(net.nodes) if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for w in out[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        if len(order) != net.nodes:
            raise ValueError(f"bush for origin {self.origin + 1} contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except ValueError:
            return False
        return True

    def reaches(self, nodes) -> bool:
        net = self.network
        seen = np.zeros(net.nodes, dtype=bool)
        seen[self.origin] = True
        for v in self.order:
            if not seen[v]:
                continue
            for e in net.adjacency[v]:
                if self.mask[e]:
                    seen[net.head[e]] = True
        return bool(np.all(seen[list(nodes)]))
