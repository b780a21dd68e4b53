"""Generating interaction weight matrices and measuring their conditioning."""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .io import Network
from .weights import WeightMatrix

DENSE_LIMIT = 500
SINGULAR_FLOOR = 1e-14


@dataclass(frozen=True)
class GenSpec:
    degrees: int
    symmetric: bool = True
    diagonal_min: float = 0.55
    seed: int = 0

    def __post_init__(self):
        if self.degrees < 0:
            raise ValueError("degrees must be nonnegative")
        if not 0.5 < self.diagonal_min <= 1.0:
            raise ValueError("diagonal_min must lie in (0.5, 1]")


def _links_at_node(network: Network) -> list[list[int]]:
    touching = [[] for _ in range(network.nodes)]
    for i, lk in enumerate(network.links):
        touching[lk.tail].append(i)
        if lk.head != lk.tail:
            touching[lk.head].append(i)
    return touching


def link_neighbors(network: Network, a: int, degrees: int, _touching=None) -> set[int]:
    """Links within ``degrees`` hops of link ``a``; links are adjacent when they share a node."""
    if degrees <= 0:
        return set()
    touching = _touching or _links_at_node(network)
    tail, head = network.tail_list, network.head_list
    depth = {a: 0}
    queue = deque([a])
    while queue:
        e = queue.popleft()
        if depth[e] == degrees:
            continue
        for v in (tail[e], head[e]):
            for b in touching[v]:
                if b not in depth:
                    depth[b] = depth[e] + 1
                    queue.append(b)
    del depth[a]
    return set(depth)


def _assemble(n, pairs, upper, lower) -> WeightMatrix:
    """Matrix with w[a,b] = upper, w[b,a] = lower for each pair and diagonals filling rows to 1."""
    if pairs:
        r = np.array([p[0] for p in pairs] + [p[1] for p in pairs])
        c = np.array([p[1] for p in pairs] + [p[0] for p in pairs])
        v = np.concatenate([upper, lower])
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0)
    off = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    off.sum_duplicates()
    diag = 1.0 - np.asarray(off.sum(axis=1)).ravel()
    return WeightMatrix(off + sp.diags(diag), validate=True)


def generate_weights(network: Network, spec: GenSpec) -> WeightMatrix:
    """Random diagonally dominant, row-normalized weights over N-hop neighbours.

    Off-diagonal weights are drawn uniformly from (0, 1] for every neighbour
    pair and scaled by one common factor so that the largest row's
    off-diagonal total equals ``1 - diagonal_min``; the diagonal fills each
    row to one.  In asymmetric mode each pair is then skewed by a random
    amount that keeps both entries nonnegative and no row over its budget.
    """
    n = network.n_links
    if spec.degrees == 0:
        return WeightMatrix.identity(n)
    touching = _links_at_node(network)
    pairs = []
    for a in range(n):
        for b in sorted(link_neighbors(network, a, spec.degrees, touching)):
            if b > a:
                pairs.append((a, b))
    rng = np.random.default_rng(spec.seed)
    base = 1.0 - rng.random(len(pairs))  # uniform on (0, 1]
    # a hair under the budget so rounding never pushes a diagonal below the minimum
    budget = (1.0 - spec.diagonal_min) * (1.0 - 1e-12)
    row_off = np.zeros(n)
    for (a, b), w in zip(pairs, base):
        row_off[a] += w
        row_off[b] += w
    peak = row_off.max() if pairs else 0.0
    scale = budget / peak if peak > 0 else 0.0
    base = base * scale
    if not pairs or scale == 0.0:
        warnings.warn("no off-diagonal weight survives; the matrix is the identity",
                      RuntimeWarning, stacklevel=2)
        return WeightMatrix.identity(n)
    if spec.symmetric:
        return _assemble(n, pairs, base, base)
    skew = rng.uniform(-1.0, 1.0, len(pairs))
    row_off = row_off * scale
    upper = base.copy()
    lower = base.copy()
    for k, (a, b) in enumerate(pairs):
        d = skew[k] * base[k]
        # d > 0 moves weight into row a, d < 0 into row b
        if d > 0:
            d = max(0.0, min(d, budget - row_off[a]))
        else:
            d = -max(0.0, min(-d, budget - row_off[b]))
        upper[k] += d
        lower[k] -= d
        row_off[a] += d
        row_off[b] -= d
    return _assemble(n, pairs, upper, lower)


def two_way_weights(network: Network, diagonal_min: float = 0.55, seed: int = 0) -> WeightMatrix:
    """Symmetric interactions between each link and its opposite-direction twin."""
    GenSpec(1, True, diagonal_min, seed)  # range checks
    rev = network.reverse_link()
    pairs = [(a, int(b)) for a, b in enumerate(rev.tolist()) if b > a]
    rng = np.random.default_rng(seed)
    w = (1.0 - rng.random(len(pairs))) * (1.0 - diagonal_min) * (1.0 - 1e-12)
    return _assemble(network.n_links, pairs, w, w)


def interpolate_symmetry(w: WeightMatrix, lam: float) -> WeightMatrix:
    """``lam * W + (1 - lam) * (W + W^T) / 2`` with the diagonal refilled to keep rows at one."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if lam == 1.0:
        return w
    m = w.matrix
    sym = 0.5 * (m + m.T)
    if lam == 0.0:
        mixed = sym.tocsr()
    else:
        mixed = (lam * m + (1.0 - lam) * sym).tocsr()
    off = mixed - sp.diags(mixed.diagonal())
    sums = np.asarray(mixed.sum(axis=1)).ravel()
    diag = mixed.diagonal()
    fix = np.abs(sums - 1.0) > 1e-12
    diag = np.where(fix, 1.0 - np.asarray(off.sum(axis=1)).ravel(), diag)
    return WeightMatrix(off + sp.diags(diag), validate=True)


@dataclass(frozen=True)
class ConditionNumber:
    value: float
    convention: str  # "eigenvalue" or "eigenvalue-modulus"
    eigen_ratio: float
    singular_ratio: float

    def __float__(self) -> float:
        return self.value


def _ratio(big, small):
    return float("inf") if small <= SINGULAR_FLOOR else big / small


def _extremes_dense(m, symmetric):
    a = m.toarray()
    if symmetric:
        ev = np.abs(np.linalg.eigvalsh(a))
    else:
        ev = np.abs(np.linalg.eigvals(a))
    sv = np.linalg.svd(a, compute_uv=False)
    return ev.max(), ev.min(), sv.max(), sv.min()


def _extremes_sparse(m, symmetric):
    m = m.tocsc()
    if symmetric:
        hi = spla.eigsh(m, k=1, which="LM", tol=1e-8, return_eigenvectors=False)
        lo = spla.eigsh(m, k=1, sigma=0.0, which="LM", tol=1e-8,
                        return_eigenvectors=False)
    else:
        hi = spla.eigs(m, k=1, which="LM", tol=1e-8, return_eigenvectors=False)
        lo = spla.eigs(m, k=1, sigma=0.0, which="LM", tol=1e-8,
                       return_eigenvectors=False)
    s_hi = spla.svds(m, k=1, which="LM", tol=1e-8, return_singular_vectors=False)
    s_lo = spla.svds(m, k=1, which="SM", tol=1e-8, return_singular_vectors=False)
    return (float(np.abs(hi).max()), float(np.abs(lo).min()),
            float(s_hi.max()), float(s_lo.min()))


def condition_number(w) -> ConditionNumber:
    """Ratio of the largest to smallest eigenvalue magnitude of ``w``.

    For nonsymmetric input the eigenvalues may be complex and their moduli
    are used; the singular-value ratio is returned alongside.  Inputs above
    500 rows use sparse iterative eigensolvers.
    """
    m = w.matrix if isinstance(w, WeightMatrix) else sp.csr_matrix(w, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise ValueError("condition number needs a square matrix")
    symmetric = (abs(m - m.T).max() == 0) if m.nnz else True
    if m.shape[0] <= DENSE_LIMIT:
        e_hi, e_lo, s_hi, s_lo = _extremes_dense(m, symmetric)
    else:
        e_hi, e_lo, s_hi, s_lo = _extremes_sparse(m, symmetric)
    eig = _ratio(e_hi, e_lo)
    return ConditionNumber(float(eig), "eigenvalue" if symmetric else "eigenvalue-modulus",
                           float(eig), float(_ratio(s_hi, s_lo)))
