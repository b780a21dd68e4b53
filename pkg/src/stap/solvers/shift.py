"""Newton flow shift between two path (or path-segment) link sets."""
from __future__ import annotations

import numpy as np


def shift_direction(path_l, path_u):
    """Links in exactly one of the two paths, with +1 on the cheaper path's side."""
    sl, su = set(path_l), set(path_u)
    only_l = sorted(sl - su)
    only_u = sorted(su - sl)
    links = np.array(only_l + only_u, dtype=np.int64)
    signs = np.concatenate([np.ones(len(only_l)), -np.ones(len(only_u))])
    return links, signs


def symmetric_curvature(jac, links_l, links_u) -> float:
    """Block form of d^T J d that is exact when J is symmetric.

    ``jac`` is any object supporting ``jac[a, b]``.
    """
    def block(rows, cols):
        return sum(float(jac[a, b]) for a in rows for b in cols)

    return block(links_l, links_l) + block(links_u, links_u) - 2.0 * block(links_l, links_u)


def newton_step(model, t, dg, links, signs, damping: float = 1.0,
                cap: float | None = None) -> float:
    """Flow to move onto the +1 links; already damped and truncated to [0, cap]."""
    if links.size == 0:
        return 0.0
    gain = -float(signs @ t[links])  # cost(U side) - cost(L side)
    if gain <= 0.0:
        return 0.0
    den = model.direction_curvature(dg, links, signs)
    if not den > 0.0:
        den = float(np.sum(dg[links] * model._diag[links]))
        if not den > 0.0:
            return 0.0
    delta = damping * gain / den
    if cap is not None and delta > cap:
        delta = cap
    return delta


def newton_shift(model, x, path_l, path_u, damping: float = 1.0,
                 max_shift: float | None = None) -> float:
    """Newton estimate of the flow to move from ``path_u`` to ``path_l``.

    Both paths are sequences of link indices for the same OD pair.  The
    result is truncated at ``max_shift`` (normally the flow on ``path_u``)
    and is zero when ``path_l`` is not strictly cheaper.
    """
    x = np.asarray(x, dtype=float)
    links, signs = shift_direction(path_l, path_u)
    f = model.effective_flows(x)
    t = model.times_from_effective(f)
    dg = model._dg(f)
    return newton_step(model, t, dg, links, signs, damping, max_shift)
