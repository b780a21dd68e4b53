"""Link performance functions with interactions.

Every model here has the form ``t_a(x) = g_a(f_a)`` with effective flows
``f = W @ x``.  For interacting BPR ``g_a`` is the ordinary BPR curve and
``W`` a row-normalized weight matrix; for the linear models used on the toy
network ``g_a(f) = c_a + f`` and ``W`` is the raw coefficient matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .io import Network
from .weights import WeightMatrix

SIMPSON_MAX_DEPTH = 40


class ObjectiveError(ValueError):
    pass


@dataclass(frozen=True)
class LineIntegral:
    value: float
    heuristic: bool  # True when the Jacobian is asymmetric (path-dependent value)


def adaptive_simpson(fn, a: float, b: float, tol: float,
                     max_depth: int = SIMPSON_MAX_DEPTH) -> float:
    """Adaptive Simpson quadrature of a scalar function on [a, b]."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fn(lm), fn(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        diff = left + right - whole
        if depth <= 0 or abs(diff) <= 15.0 * eps:
            return left + right + diff / 15.0
        return (rec(lo, mid, fa, flm, fm, left, eps / 2, depth - 1)
                + rec(mid, hi, fm, frm, fb, right, eps / 2, depth - 1))

    fa, fb, fm = fn(a), fn(b), fn(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


class CostModel:
    """Interacting link costs ``t = g(W x)``.

    Subclasses supply ``g``, its derivative and (optionally) its
    antiderivative, each evaluated on a subset of links.
    """

    kind: str

    def __init__(self, network: Network, weights):
        self.network = network
        if isinstance(weights, WeightMatrix):
            w = weights.matrix
        else:
            w = sp.csr_matrix(weights, dtype=float)
        n = network.n_links
        if w.shape != (n, n):
            raise ValueError(f"weights are {w.shape}, network has {n} links")
        self.W = w.tocsr()
        self.W.sort_indices()
        self.Wc = self.W.tocsc()
        self.Wc.sort_indices()
        off = self.W - sp.diags(self.W.diagonal())
        off.eliminate_zeros()
        self.separable = off.nnz == 0
        self.symmetric = self.separable or (abs(self.W - self.W.T).max() == 0)
        self.kind = "separable" if self.separable else "interacting"
        self._diag = self.W.diagonal()
        # per-row / per-column slices for small-set updates
        self._row_cols = np.split(self.W.indices, self.W.indptr[1:-1])
        self._row_vals = np.split(self.W.data, self.W.indptr[1:-1])
        self._col_rows = np.split(self.Wc.indices, self.Wc.indptr[1:-1])
        self._col_vals = np.split(self.Wc.data, self.Wc.indptr[1:-1])

    # -- link functions, overridden -------------------------------------------------
    def _g(self, f, idx=slice(None)):
        raise NotImplementedError

    def _dg(self, f, idx=slice(None)):
        raise NotImplementedError

    def _antiderivative(self, f, idx=slice(None)):
        """Integral of g from 0 to f; None when no closed form exists."""
        return None

    @property
    def jacobian_symmetric(self) -> bool:
        """Whether dt/dx is symmetric at every x (exact, not approximate)."""
        return self.separable

    @property
    def n_links(self) -> int:
        return self.network.n_links

    # -- evaluation ---------------------------------------------------------------
    def effective_flows(self, x) -> np.ndarray:
        return self.W @ np.asarray(x, dtype=float)

    def effective_flow(self, x, a: int) -> float:
        return float(self._row_vals[a] @ np.asarray(x, dtype=float)[self._row_cols[a]])

    def link_times(self, x) -> np.ndarray:
        return self._g(self.effective_flows(x))

    def link_time(self, x, a: int) -> float:
        f = self.effective_flow(x, a)
        return float(self._g(np.array([f]), np.array([a]))[0])

    def times_from_effective(self, f) -> np.ndarray:
        return self._g(f)

    def derivatives(self, x) -> np.ndarray:
        """dg_a/df_a at the effective flows of x."""
        return self._dg(self.effective_flows(x))

    def jacobian(self, x) -> sp.csr_matrix:
        """Sparse Jacobian dt_a/dx_b = g'_a(f_a) w_ab."""
        return (sp.diags(self.derivatives(x)) @ self.W).tocsr()

    def cost_jacobian_entry(self, x, a: int, b: int) -> float:
        w = self.W[a, b]
        if w == 0:
            return 0.0
        f = self.effective_flow(x, a)
        return float(self._dg(np.array([f]), np.array([a]))[0] * w)

    def direction_curvature(self, dg, links, signs) -> float:
        """d^T J d for a direction with entries ``signs`` on ``links``.

        ``dg`` holds g'_a at the current effective flows.
        """
        if self.separable:
            return float(np.sum(dg[links] * self._diag[links]))
        pos = dict(zip(links.tolist(), signs.tolist()))
        total = 0.0
        for a, sa in pos.items():
            cols = self._row_cols[a]
            vals = self._row_vals[a]
            acc = 0.0
            for b, w in zip(cols.tolist(), vals.tolist()):
                sb = pos.get(b)
                if sb is not None:
                    acc += sb * w
            total += sa * dg[a] * acc
        return total

    # -- incremental updates --------------------------------------------------------
    def apply_shift(self, x, f, t, dg, links, signs, delta: float) -> None:
        """Move ``delta`` along ``signs`` on ``links`` and refresh affected times.

        ``x``, ``f`` (effective flows), ``t`` and ``dg`` are updated in place.
        """
        step = delta * signs
        x[links] += step
        if self.separable:
            f[links] += step * self._diag[links]
            aff = links
        else:
            parts = []
            for j, s in zip(links.tolist(), step.tolist()):
                rows = self._col_rows[j]
                f[rows] += s * self._col_vals[j]
                parts.append(rows)
            aff = np.unique(np.concatenate(parts))
        t[aff] = self._g(f[aff], aff)
        if dg is not None:
            dg[aff] = self._dg(f[aff], aff)

    # -- objectives ---------------------------------------------------------------
    def beckmann_objective(self, x) -> float:
        if not self.separable:
            raise ObjectiveError("beckmann_objective needs a separable model; "
                                 "use line_integral_objective")
        x = np.asarray(x, dtype=float)
        return float(sum(self._integrate_1d(a, 0.0, x[a])
                         for a in np.flatnonzero(x).tolist()))

    def line_integral_objective(self, x, order=None) -> LineIntegral:
        """Line integral of t from 0 to x along an axis-ordered path.

        ``order`` lists links in the order their coordinates are raised;
        the default is link-index order.
        """
        x = np.asarray(x, dtype=float)
        n = self.n_links
        order = np.arange(n) if order is None else np.asarray(order)
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        total = 0.0
        for a in order.tolist():
            xa = x[a]
            if xa == 0.0:
                continue
            cols, vals = self._row_cols[a], self._row_vals[a]
            before = rank[cols] < rank[a]
            base = float(vals[before] @ x[cols[before]])
            total += self._integrate_1d(a, base, xa)
        return LineIntegral(total, heuristic=not self.symmetric)

    def path_discrepancy(self, x) -> float:
        """Difference between forward and reversed axis-path line integrals."""
        n = self.n_links
        fwd = self.line_integral_objective(x).value
        rev = self.line_integral_objective(x, order=np.arange(n)[::-1]).value
        return abs(fwd - rev)

    def objective(self, x) -> float | None:
        """Beckmann or line-integral value; None for asymmetric models."""
        if self.separable:
            return self.beckmann_objective(x)
        if self.symmetric:
            return self.line_integral_objective(x).value
        return None

    def _integrate_1d(self, a, base, xa):
        """Integral over s in [0, xa] of g_a(base + w_aa s)."""
        waa = self._diag[a]
        idx = np.array([a])
        if waa == 0.0:
            return float(self._g(np.array([base]), idx)[0]) * xa
        lo = self._antiderivative(np.array([base]), idx)
        if lo is not None:
            hi = self._antiderivative(np.array([base + waa * xa]), idx)
            return float(hi[0] - lo[0]) / waa
        F = abs(float(self._g(np.array([base + waa * xa]), idx)[0]) * xa)
        return adaptive_simpson(
            lambda s: float(self._g(np.array([base + waa * s]), idx)[0]),
            0.0, xa, 1e-8 * (1.0 + F))


class BPRCost(CostModel):
    """``t_a = fft_a (1 + b_a (f_a / c_a) ** p_a)`` with ``f = W x``."""

    def __init__(self, network: Network, weights=None):
        if weights is None:
            weights = WeightMatrix.identity(network.n_links)
        super().__init__(network, weights)
        self.fft = network.free_flow_time
        self.b = network.bpr_b
        self.cap = network.capacity
        self.power = network.bpr_power

    def _g(self, f, idx=slice(None)):
        return self.fft[idx] * (1.0 + self.b[idx] * (f / self.cap[idx]) ** self.power[idx])

    def _dg(self, f, idx=slice(None)):
        p = self.power[idx]
        c = self.cap[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(p == 0, 0.0, p * np.power(f / c, np.maximum(p - 1.0, 0.0)))
        # p in (0, 1) at f = 0 has an infinite slope; clip keeps Newton finite
        r = np.where(np.isfinite(r), r, 0.0)
        return self.fft[idx] * self.b[idx] * r / c

    def _antiderivative(self, f, idx=slice(None)):
        p = self.power[idx]
        return self.fft[idx] * (f + self.b[idx] * f * (f / self.cap[idx]) ** p / (p + 1.0))

    @property
    def jacobian_symmetric(self) -> bool:
        if self.separable:
            return True
        # g' constant only when every power is 0 or 1
        slope = self.fft * self.b / self.cap
        return bool(self.symmetric and np.all(self.power == 1.0)
                    and np.allclose(slope, slope[0], rtol=1e-12, atol=0))


class LinearCost(CostModel):
    """``t = c + M x`` for a constant vector c and coefficient matrix M."""

    def __init__(self, network: Network, constants, coefficients):
        super().__init__(network, coefficients)
        self.constants = np.asarray(constants, dtype=float)

    def _g(self, f, idx=slice(None)):
        return self.constants[idx] + f

    def _dg(self, f, idx=slice(None)):
        return np.ones_like(np.asarray(f, dtype=float))

    def _antiderivative(self, f, idx=slice(None)):
        return self.constants[idx] * f + 0.5 * f * f

    @property
    def jacobian_symmetric(self) -> bool:
        return self.symmetric

    def quadratic_form(self, x) -> float:
        """c.x + x^T M x / 2 (the objective when M is symmetric)."""
        x = np.asarray(x, dtype=float)
        return float(self.constants @ x + 0.5 * x @ (self.W @ x))


@dataclass(frozen=True)
class MergeNode:
    """Two upstream links merging into one downstream link (point queues)."""

    t0_1: float
    t0_2: float
    u3: float
    delay_coeff: float = 1.0

    def __post_init__(self):
        if not self.u3 > 0:
            raise ValueError("downstream saturation flow must be positive")


def jin_zhang_times(m: MergeNode, x1: float, x2: float) -> tuple[float, float]:
    """Upstream travel times under proportional (Jin-Zhang) merging."""
    excess = (x1 + x2) / m.u3 - 1.0
    if excess <= 0:
        return m.t0_1, m.t0_2
    d = m.delay_coeff * excess
    return m.t0_1 + d, m.t0_2 + d


def jin_zhang_jacobian(m: MergeNode, x1: float, x2: float) -> np.ndarray:
    """2x2 Jacobian; at the kink x1 + x2 = u3 the congested branch is used."""
    if x1 + x2 < m.u3:
        return np.zeros((2, 2))
    return np.full((2, 2), m.delay_coeff / m.u3)
