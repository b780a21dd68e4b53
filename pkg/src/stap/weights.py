"""Sparse link-interaction weight matrices.

A weight matrix ``W`` maps link flows to effective flows, ``f = W @ x``.
Rows are nonnegative and sum to one; the separable case is ``W = I``.
"""
from __future__ import annotations

import io

import numpy as np
import scipy.sparse as sp

ROW_SUM_TOL = 1e-9


class WeightError(ValueError):
    pass


class WeightMatrix:
    """Row-normalized, nonnegative sparse interaction weights.

    The matrix is stored as CSR with sorted column indices.  Diagonal
    entries are always stored explicitly, even when zero.
    """

    def __init__(self, matrix, validate: bool = True):
        m = sp.csr_matrix(matrix, dtype=float)
        if m.shape[0] != m.shape[1]:
            raise WeightError(f"weight matrix must be square, got {m.shape}")
        n = m.shape[0]
        m.eliminate_zeros()
        # force explicit diagonal storage
        diag = m.diagonal()
        m = (m + sp.identity(n, format="csr")).tocsr()
        m.setdiag(diag)
        m.sort_indices()
        self.matrix = m
        if validate:
            self.validate()

    @classmethod
    def identity(cls, n: int) -> WeightMatrix:
        return cls(sp.identity(n, format="csr"))

    @classmethod
    def from_rows(cls, rows: dict[int, dict[int, float]], n: int,
                  validate: bool = True) -> WeightMatrix:
        r, c, v = [], [], []
        for a, row in rows.items():
            for b, w in row.items():
                r.append(a)
                c.append(b)
                v.append(w)
        m = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
        return cls(m, validate=validate)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def row(self, a: int) -> list[tuple[int, float]]:
        m = self.matrix
        lo, hi = m.indptr[a], m.indptr[a + 1]
        return list(zip(m.indices[lo:hi].tolist(), m.data[lo:hi].tolist()))

    def rows(self):
        for a in range(self.n):
            yield a, self.row(a)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def transpose(self) -> WeightMatrix:
        return WeightMatrix(self.matrix.T.tocsr(), validate=False)

    def is_identity(self) -> bool:
        m = self.matrix
        off = m - sp.diags(m.diagonal())
        return off.count_nonzero() == 0 and np.all(m.diagonal() == 1.0)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        d = self.matrix - self.matrix.T
        if d.nnz == 0:
            return True
        return float(np.max(np.abs(d.data))) <= tol

    def validate(self) -> None:
        m = self.matrix
        if m.nnz and m.data.min() < 0:
            raise WeightError("negative weight")
        sums = self.row_sums()
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            a = int(bad[0])
            raise WeightError(f"row {a + 1} sums to {sums[a]!r}, expected 1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        if self.matrix.shape != other.matrix.shape:
            return False
        a, b = self.matrix, other.matrix
        return (np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices)
                and np.array_equal(a.data, b.data))

    def __repr__(self) -> str:
        return f"WeightMatrix(n={self.n}, nnz={self.nnz})"


def write_weights(w: WeightMatrix) -> str:
    """Serialize to the ``TAPW`` text format (1-based link indices)."""
    out = io.StringIO()
    out.write(f"TAPW 1 {w.n}\n")
    m = w.matrix
    for a in range(w.n):
        for k in range(m.indptr[a], m.indptr[a + 1]):
            b = int(m.indices[k])
            v = float(m.data[k])
            if v == 0.0 and a != b:
                continue
            out.write(f"{a + 1} {b + 1} {v:.17g}\n")
    return out.getvalue()


def read_weights(text: str, validate: bool = True) -> WeightMatrix:
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("~")]
    if not lines or lines[0][0] != "TAPW" or len(lines[0]) != 3:
        raise WeightError("missing 'TAPW 1 <num_links>' header")
    if lines[0][1] != "1":
        raise WeightError(f"unsupported weight format version {lines[0][1]}")
    n = int(lines[0][2])
    rows, cols, vals = [], [], []
    for parts in lines[1:]:
        if len(parts) != 3:
            raise WeightError(f"malformed weight line: {' '.join(parts)}")
        a, b, v = int(parts[0]), int(parts[1]), float(parts[2])
        if not (1 <= a <= n and 1 <= b <= n):
            raise WeightError(f"link index out of range in line: {' '.join(parts)}")
        if v < 0:
            raise WeightError(f"negative weight in line: {' '.join(parts)}")
        rows.append(a - 1)
        cols.append(b - 1)
        vals.append(v)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return WeightMatrix(m, validate=validate)
